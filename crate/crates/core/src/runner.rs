//! Run orchestration: assemble once, then per frequency condense the
//! subdomains, solve the boundary system, sample the surface, and export
//! CSV artifacts. Also drives resolution sweeps for convergence studies.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::assembly::{assemble_coefficients, BasisCache, CoefficientMatrices, DofMap};
use crate::config::{build_halfspace_mesh, Model, ModelSpan, StudyAxis};
use crate::error::{Result, SolverError};
use crate::field::{
    recover_fields, surface_samples, write_field_csv, write_phase_csv, write_surface_csv,
};
use crate::global::{
    apply_symmetry_constraints, assemble_global, solve, strip_load_vector, CVector,
};
use crate::mesh::{Mesh, RadialGrid, SubdomainKind};
use crate::oracle::HalfspaceProblem;
use crate::radial::{condense, RadialCondensation, RadialOperator, RecoveryStore};

/// Error of a computed surface curve against the analytic reference:
/// plain sums of squared differences plus their relative L2 forms,
/// real and imaginary parts kept separate.
#[derive(Debug, Clone, Copy)]
pub struct ErrorNorms {
    pub sse_re: f64,
    pub sse_im: f64,
    pub rel_l2_re: f64,
    pub rel_l2_im: f64,
}

impl ErrorNorms {
    pub fn against(surface: &[(f64, Complex64)], reference: &[Complex64]) -> Self {
        let mut sse_re = 0.0;
        let mut sse_im = 0.0;
        let mut ref_re = 0.0;
        let mut ref_im = 0.0;
        for ((_, u), v) in surface.iter().zip(reference) {
            sse_re += (u.re - v.re).powi(2);
            sse_im += (u.im - v.im).powi(2);
            ref_re += v.re.powi(2);
            ref_im += v.im.powi(2);
        }
        Self {
            sse_re,
            sse_im,
            rel_l2_re: (sse_re / ref_re).sqrt(),
            rel_l2_im: (sse_im / ref_im).sqrt(),
        }
    }
}

/// Everything computed for one frequency of a run.
#[derive(Debug)]
pub struct FrequencyResult {
    pub frequency_hz: f64,
    pub n_dofs: usize,
    pub surface: Vec<(f64, Complex64)>,
    pub errors: Option<ErrorNorms>,
    pub seconds: f64,
}

#[derive(Debug)]
pub struct RunReport {
    pub n_nodes: usize,
    pub n_elements: usize,
    pub block_sizes: Vec<usize>,
    pub frequencies: Vec<FrequencyResult>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    /// Plain-text summary: model size, per-frequency timings and error
    /// norms, artifact list.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "model: {} nodes, {} elements, {} global dofs, subdomain blocks {:?}",
            self.n_nodes,
            self.n_elements,
            2 * self.n_nodes,
            self.block_sizes
        );
        for f in &self.frequencies {
            let _ = write!(
                s,
                "frequency {} Hz: {} dofs, {:.2} s",
                f.frequency_hz, f.n_dofs, f.seconds
            );
            if let Some(e) = &f.errors {
                let _ = write!(
                    s,
                    ", SSE(Re) {:.6e}, SSE(Im) {:.6e}, rel L2(Re) {:.3}%, rel L2(Im) {:.3}%",
                    e.sse_re,
                    e.sse_im,
                    100.0 * e.rel_l2_re,
                    100.0 * e.rel_l2_im
                );
            }
            let _ = writeln!(s);
        }
        for file in &self.files {
            let _ = writeln!(s, "wrote {}", file.display());
        }
        s
    }
}

/// One resolution point of a convergence study.
#[derive(Debug)]
pub struct StudyPoint {
    pub frequency_hz: f64,
    pub value: usize,
    /// Steps or interpolation points per pressure wavelength, depending on
    /// the study axis.
    pub per_wavelength: f64,
    pub errors: ErrorNorms,
    pub seconds: f64,
}

#[derive(Debug)]
pub struct StudyReport {
    pub axis: StudyAxis,
    pub points: Vec<StudyPoint>,
    pub files: Vec<PathBuf>,
}

impl StudyReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "convergence study over {}: {} runs",
            self.axis.label(),
            self.points.len()
        );
        for p in &self.points {
            let _ = writeln!(
                s,
                "{} Hz, {} = {:4}: {:7.2} per wavelength, SSE(Re) {:.6e}, SSE(Im) {:.6e}, \
                 rel L2(Re) {:.3}%, rel L2(Im) {:.3}% [{:.2} s]",
                p.frequency_hz,
                self.axis.label(),
                p.value,
                p.per_wavelength,
                p.errors.sse_re,
                p.errors.sse_im,
                100.0 * p.errors.rel_l2_re,
                100.0 * p.errors.rel_l2_im,
                p.seconds
            );
        }
        for file in &self.files {
            let _ = writeln!(s, "wrote {}", file.display());
        }
        s
    }
}

/// Longest radial distance spanned by any subdomain's grid: the boundary
/// radius scaled by the grid's span in the radial coordinate, so a bounded
/// square contributes its center-to-corner distance while an exterior
/// truncated at twice the boundary radius contributes the corner radius
/// itself. All radial lines of a subdomain share one step count, so the
/// longest distance carries the coarsest step; it is the length that
/// resolution-per-wavelength figures normalize against.
pub fn radial_extent(mesh: &Mesh) -> f64 {
    let mut best = 0.0f64;
    for sub in &mesh.subdomains {
        let span = (RadialGrid::XI_END - sub.grid.xi_start).abs();
        for &e in &sub.elements {
            for &n in &mesh.elements[e].nodes {
                let dx = mesh.nodes[n][0] - sub.center.x;
                let dy = mesh.nodes[n][1] - sub.center.y;
                best = best.max(dx.hypot(dy) * span);
            }
        }
    }
    best
}

/// Longest boundary element, as the polyline length through its nodes,
/// over the bounded subdomains (over all if none is bounded).
pub fn longest_element(mesh: &Mesh) -> f64 {
    let longest = |kinds: &dyn Fn(SubdomainKind) -> bool| {
        let mut best = 0.0f64;
        for sub in mesh.subdomains.iter().filter(|s| kinds(s.kind)) {
            for &e in &sub.elements {
                let nodes = &mesh.elements[e].nodes;
                let len: f64 = nodes
                    .windows(2)
                    .map(|w| {
                        let a = mesh.nodes[w[0]];
                        let b = mesh.nodes[w[1]];
                        (b[0] - a[0]).hypot(b[1] - a[1])
                    })
                    .sum();
                best = best.max(len);
            }
        }
        best
    };
    let bounded = longest(&|k| k == SubdomainKind::Bounded);
    if bounded > 0.0 {
        bounded
    } else {
        longest(&|_| true)
    }
}

/// Uniformly spaced sample positions spanning the mesh's free surface.
pub fn surface_positions(mesh: &Mesh, samples: usize) -> Result<Vec<f64>> {
    let extent = mesh
        .nodes
        .iter()
        .map(|n| n[0].abs().max(n[1].abs()))
        .fold(0.0, f64::max);
    let tol = 1e-9 * extent;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for n in &mesh.nodes {
        if n[1].abs() <= tol {
            lo = lo.min(n[0]);
            hi = hi.max(n[0]);
        }
    }
    if !(lo < hi) {
        return Err(SolverError::LoadOutsideMesh(
            "the mesh has no elements on the free surface y = 0".into(),
        ));
    }
    Ok((0..samples)
        .map(|i| lo + (hi - lo) * (i as f64 / (samples - 1) as f64))
        .collect())
}

/// The condensations and dof maps of every subdomain at one frequency,
/// plus the solved boundary displacements.
pub struct FrequencySolution {
    pub omega: f64,
    pub solution: CVector,
    pub parts: Vec<(RadialCondensation, DofMap)>,
}

/// Condenses every subdomain at `omega`, assembles and solves the global
/// boundary system. `coeffs` comes from [`assemble_model`]; the load vector
/// is frequency independent and shared across calls.
pub fn solve_frequency(
    mesh: &Mesh,
    coeffs: &[(CoefficientMatrices, DofMap)],
    load_rhs: &CVector,
    symmetric: bool,
    omega: f64,
    store: RecoveryStore,
) -> Result<FrequencySolution> {
    let parts: Vec<(RadialCondensation, DofMap)> = mesh
        .subdomains
        .iter()
        .zip(coeffs)
        .map(|(sub, (c, dofs))| {
            let op = RadialOperator::new(c, sub.kind, sub.grid, sub.damping, omega)?;
            Ok((condense(&op, sub.kind, store)?, dofs.clone()))
        })
        .collect::<Result<_>>()?;

    let borrowed: Vec<(&RadialCondensation, &DofMap)> =
        parts.iter().map(|(c, d)| (c, d)).collect();
    let mut system = assemble_global(mesh, &borrowed)?;
    let mut rhs = load_rhs.clone();
    if symmetric {
        apply_symmetry_constraints(&mut system, &mut rhs, mesh);
    }
    let solution = solve(&system, &rhs)?;
    Ok(FrequencySolution {
        omega,
        solution,
        parts,
    })
}

/// Coefficient matrices and dof maps of every subdomain; frequency
/// independent, so assembled once per mesh.
pub fn assemble_model(
    mesh: &Mesh,
    cache: &BasisCache,
) -> Result<Vec<(CoefficientMatrices, DofMap)>> {
    mesh.subdomains
        .iter()
        .map(|sub| assemble_coefficients(mesh, sub, cache))
        .collect()
}

fn freq_label(f: f64) -> String {
    if f == f.round() && f.abs() < 1e9 {
        format!("{}", f as i64)
    } else {
        format!("{f}")
    }
}

fn phase_label(deg: f64) -> String {
    if deg == deg.round() {
        format!("{:03}", deg as i64)
    } else {
        format!("{deg}")
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Runs the model: one solve per frequency, surface CSV always, field and
/// phase-snapshot CSVs on request, analytic reference curve and error norms
/// when the oracle is enabled.
pub fn run(model: &Model) -> Result<RunReport> {
    model.mesh.validate()?;
    let mesh = &model.mesh;
    let cache = BasisCache::for_mesh(mesh)?;
    let coeffs = assemble_model(mesh, &cache)?;
    let load_rhs = strip_load_vector(mesh, &cache, &model.load)?;
    let positions = surface_positions(mesh, model.output.surface_samples)?;

    let oracle = if model.output.oracle {
        let material = mesh.materials[model
            .halfspace
            .as_ref()
            .map(|h| h.material)
            .unwrap_or(mesh.subdomains[0].material)];
        Some(HalfspaceProblem::new(
            material,
            model.load.pressure,
            model.load.half_width,
        )?)
    } else {
        None
    };

    let keep_fields = model.output.fields || !model.output.phase_angles_deg.is_empty();
    let store = if keep_fields {
        RecoveryStore::Keep
    } else {
        RecoveryStore::Discard
    };
    let outdir = &model.output.directory;
    fs::create_dir_all(outdir)?;

    let outcomes: Vec<(FrequencyResult, Vec<PathBuf>)> = model
        .frequencies_hz
        .par_iter()
        .map(|&f| {
            let start = Instant::now();
            let omega = 2.0 * std::f64::consts::PI * f;
            let sol = solve_frequency(mesh, &coeffs, &load_rhs, model.symmetric, omega, store)?;
            let surface = surface_samples(mesh, &cache, &sol.solution, &positions)?;

            let mut files = Vec::new();
            let label = freq_label(f);
            let path = outdir.join(format!("surface_{label}hz.csv"));
            write_surface_csv(&mut create(&path)?, &surface)?;
            files.push(path);

            let errors = match &oracle {
                Some(problem) => {
                    let reference: Vec<Complex64> = positions
                        .iter()
                        .map(|&x| problem.surface_displacement(omega, x))
                        .collect::<Result<_>>()?;
                    let curve: Vec<(f64, Complex64)> = positions
                        .iter()
                        .copied()
                        .zip(reference.iter().copied())
                        .collect();
                    let path = outdir.join(format!("analytic_{label}hz.csv"));
                    write_surface_csv(&mut create(&path)?, &curve)?;
                    files.push(path);
                    Some(ErrorNorms::against(&surface, &reference))
                }
                None => None,
            };

            if keep_fields {
                let fields = recover_fields(&sol.parts, &sol.solution)?;
                if model.output.fields {
                    let path = outdir.join(format!("field_{label}hz.csv"));
                    write_field_csv(&mut create(&path)?, mesh, &cache, &fields)?;
                    files.push(path);
                }
                for &deg in &model.output.phase_angles_deg {
                    let path =
                        outdir.join(format!("field_{label}hz_phase{}.csv", phase_label(deg)));
                    let phase = deg.to_radians();
                    write_phase_csv(&mut create(&path)?, mesh, &cache, &fields, phase)?;
                    files.push(path);
                }
            }

            Ok((
                FrequencyResult {
                    frequency_hz: f,
                    n_dofs: 2 * mesh.nodes.len(),
                    surface,
                    errors,
                    seconds: start.elapsed().as_secs_f64(),
                },
                files,
            ))
        })
        .collect::<Result<_>>()?;

    let mut report = RunReport {
        n_nodes: mesh.nodes.len(),
        n_elements: mesh.elements.len(),
        block_sizes: coeffs.iter().map(|(_, d)| d.n_dofs()).collect(),
        frequencies: Vec::new(),
        files: Vec::new(),
    };
    for (result, files) in outcomes {
        report.frequencies.push(result);
        report.files.extend(files);
    }

    let summary_path = outdir.join("summary.txt");
    write!(create(&summary_path)?, "{}", report.summary())?;
    report.files.push(summary_path);
    Ok(report)
}

/// Sweeps one resolution axis of the parametric model and tabulates error
/// norms against the analytic curve, normalized per pressure wavelength.
pub fn study(model: &Model) -> Result<StudyReport> {
    let table = model
        .study
        .as_ref()
        .ok_or_else(|| SolverError::InvalidMesh("the config has no [study] section".into()))?;
    let base = model
        .halfspace
        .as_ref()
        .ok_or_else(|| SolverError::InvalidMesh("the study needs a [halfspace] model".into()))?;
    let material = model.mesh.materials[base.material];
    let problem = HalfspaceProblem::new(material, model.load.pressure, model.load.half_width)?;
    let (c_p, _) = material.wave_speeds();

    // The per-wavelength normalization depends on the physical layout only,
    // not on the swept resolution; take it from the resolved base mesh.
    let radial_extent = radial_extent(&model.mesh);
    let element_length = longest_element(&model.mesh);
    let positions = surface_positions(&model.mesh, model.output.surface_samples)?;

    // The analytic curve is reused across every value of a case.
    let references: Vec<Vec<Complex64>> = table
        .cases
        .par_iter()
        .map(|case| {
            let omega = 2.0 * std::f64::consts::PI * case.frequency_hz;
            positions
                .iter()
                .map(|&x| problem.surface_displacement(omega, x))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;

    let tasks: Vec<(usize, usize)> = table
        .cases
        .iter()
        .enumerate()
        .flat_map(|(c, case)| (0..case.values.len()).map(move |v| (c, v)))
        .collect();

    let points: Vec<StudyPoint> = tasks
        .par_iter()
        .map(|&(c, v)| {
            let case = &table.cases[c];
            let value = case.values[v];
            let start = Instant::now();
            let mut params = base.clone();
            match table.axis {
                StudyAxis::RadialSteps => params.radial_steps = value,
                StudyAxis::GllPoints => params.gll_points = value,
            }
            let mesh =
                build_halfspace_mesh(&params, &model.mesh.materials, ModelSpan::SymmetricHalf)
                    .map_err(|e| SolverError::InvalidMesh(e.to_string()))?;
            mesh.validate()?;
            let cache = BasisCache::for_mesh(&mesh)?;
            let coeffs = assemble_model(&mesh, &cache)?;
            let load_rhs = strip_load_vector(&mesh, &cache, &model.load)?;
            let omega = 2.0 * std::f64::consts::PI * case.frequency_hz;
            let sol = solve_frequency(
                &mesh,
                &coeffs,
                &load_rhs,
                model.symmetric,
                omega,
                RecoveryStore::Discard,
            )?;
            let surface = surface_samples(&mesh, &cache, &sol.solution, &positions)?;
            let errors = ErrorNorms::against(&surface, &references[c]);

            let wavelength = c_p / case.frequency_hz;
            let per_wavelength = match table.axis {
                StudyAxis::RadialSteps => value as f64 * wavelength / radial_extent,
                StudyAxis::GllPoints => value as f64 * wavelength / element_length,
            };
            Ok(StudyPoint {
                frequency_hz: case.frequency_hz,
                value,
                per_wavelength,
                errors,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;

    let outdir = &model.output.directory;
    fs::create_dir_all(outdir)?;
    let csv_path = outdir.join(format!("study_{}.csv", table.axis.label()));
    let mut out = create(&csv_path)?;
    writeln!(
        out,
        "frequency_hz,{},per_wavelength,sse_re,sse_im,rel_l2_re,rel_l2_im",
        table.axis.label()
    )?;
    for p in &points {
        writeln!(
            out,
            "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            p.frequency_hz,
            p.value,
            p.per_wavelength,
            p.errors.sse_re,
            p.errors.sse_im,
            p.errors.rel_l2_re,
            p.errors.rel_l2_im
        )?;
    }
    drop(out);

    let mut report = StudyReport {
        axis: table.axis,
        points,
        files: vec![csv_path],
    };
    let summary_path = outdir.join("study_summary.txt");
    write!(create(&summary_path)?, "{}", report.summary())?;
    report.files.push(summary_path);
    Ok(report)
}
