//! Run configuration: the TOML file schema, its resolution into a validated
//! [`Model`], and the parametric half-space mesh builder.
//!
//! A file describes the mesh either parametrically (`[halfspace]`) or
//! explicitly (`[[mesh.nodes]]` / `[[mesh.elements]]` / `[[mesh.subdomains]]`),
//! plus the strip load, the frequency list, and output selection. Exactly one
//! of the two mesh forms must be present.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::basis::ReferenceBasis;
use crate::geometry::{BoundaryElement, ScalingCenter};
use crate::global::StripLoad;
use crate::material::{DampingProfile, Material};
use crate::mesh::{Mesh, RadialGrid, Subdomain, SubdomainKind};

/// Configuration failures, kept apart from numerical errors so callers can
/// report them under a distinct exit status.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(Box<toml::de::Error>),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// Raw file contents, straight from TOML.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub materials: Vec<Material>,
    pub halfspace: Option<HalfspaceParams>,
    pub mesh: Option<MeshTables>,
    pub load: LoadTable,
    pub frequencies: FrequencyTable,
    #[serde(default)]
    pub output: OutputSettings,
    pub study: Option<StudyTable>,
    /// Mirror-plane constraint at x = 0. Defaults to on for the parametric
    /// half model and off for explicit meshes.
    pub symmetric: Option<bool>,
}

/// Parametric half-space model: a square of side `domain_size` below the
/// free surface, every element of its bottom and right edges continued
/// outward into an unbounded fan of wedges scaled from the strip center.
///
/// `coupled_exterior` controls whether that fan is condensed as one radial
/// system (default) or as independent single-element wedges. The wedges
/// share only their interface nodes, so their flanks act as traction-free
/// slits beyond the interface; at wavelengths comparable to the domain size
/// this adds spurious compliance, and the coupled fan is the configuration
/// that matches the analytic half-space curve.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceParams {
    #[serde(default = "default_domain_size")]
    pub domain_size: f64,
    #[serde(default)]
    pub material: usize,
    #[serde(default = "default_elements_per_edge")]
    pub elements_per_edge: usize,
    #[serde(default = "default_gll_points")]
    pub gll_points: usize,
    #[serde(default = "default_radial_steps")]
    pub radial_steps: usize,
    #[serde(default = "default_bounded_start")]
    pub bounded_start: f64,
    #[serde(default = "default_unbounded_start")]
    pub unbounded_start: f64,
    /// Damping ratio at the truncated face of the unbounded wedges; it
    /// grades linearly down to the material ratio at the interface.
    #[serde(default = "default_truncation_damping")]
    pub truncation_damping: f64,
    #[serde(default = "default_coupled_exterior")]
    pub coupled_exterior: bool,
}

fn default_domain_size() -> f64 {
    120.0
}
fn default_elements_per_edge() -> usize {
    4
}
fn default_gll_points() -> usize {
    10
}
fn default_radial_steps() -> usize {
    100
}
fn default_bounded_start() -> f64 {
    1e-6
}
fn default_unbounded_start() -> f64 {
    2.0
}
fn default_truncation_damping() -> f64 {
    1.0
}
fn default_coupled_exterior() -> bool {
    true
}

/// Explicit mesh description.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshTables {
    pub nodes: Vec<NodeRow>,
    pub elements: Vec<ElementRow>,
    pub subdomains: Vec<SubdomainRow>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRow {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementRow {
    pub id: usize,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubdomainRow {
    pub kind: SubdomainKind,
    pub center: ScalingCenter,
    pub elements: Vec<usize>,
    #[serde(default)]
    pub material: usize,
    #[serde(default = "default_radial_steps")]
    pub radial_steps: usize,
    /// Defaults to 1e-6 for bounded and 2.0 for unbounded subdomains.
    pub radial_start: Option<f64>,
    /// Defaults to constant damping at the material's ratio.
    pub damping: Option<DampingProfile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadTable {
    pub pressure: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyTable {
    pub values_hz: Vec<f64>,
}

/// Output selection. Surface curves are always written; interior fields and
/// phase snapshots only on request, and the analytic reference curve plus
/// error norms only with `oracle` on.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSettings {
    pub directory: PathBuf,
    pub surface_samples: usize,
    pub fields: bool,
    pub phase_angles_deg: Vec<f64>,
    pub oracle: bool,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            surface_samples: 97,
            fields: false,
            phase_angles_deg: Vec::new(),
            oracle: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyAxis {
    RadialSteps,
    GllPoints,
}

impl StudyAxis {
    pub fn label(self) -> &'static str {
        match self {
            StudyAxis::RadialSteps => "radial_steps",
            StudyAxis::GllPoints => "gll_points",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyCase {
    pub frequency_hz: f64,
    pub values: Vec<usize>,
}

/// Convergence study request: sweep one resolution axis per frequency.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyTable {
    pub axis: StudyAxis,
    pub cases: Vec<StudyCase>,
}

/// A validated model, ready to run.
#[derive(Debug, Clone)]
pub struct Model {
    pub mesh: Mesh,
    pub load: StripLoad,
    pub frequencies_hz: Vec<f64>,
    pub output: OutputSettings,
    pub symmetric: bool,
    pub study: Option<StudyTable>,
    /// Kept when the mesh came from the parametric builder; convergence
    /// studies rebuild the mesh from these parameters.
    pub halfspace: Option<HalfspaceParams>,
}

impl FileConfig {
    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(Box::new(e)))
    }

    /// Validates everything and builds the mesh.
    pub fn resolve(self) -> Result<Model, ConfigError> {
        if self.materials.is_empty() {
            return Err(invalid("at least one [[materials]] entry is required"));
        }
        for (i, m) in self.materials.iter().enumerate() {
            m.validate()
                .map_err(|e| invalid(format!("materials[{i}]: {e}")))?;
        }

        if !(self.load.pressure.is_finite() && self.load.pressure != 0.0) {
            return Err(invalid(format!(
                "load.pressure must be finite and nonzero, got {}",
                self.load.pressure
            )));
        }
        if !(self.load.half_width.is_finite() && self.load.half_width > 0.0) {
            return Err(invalid(format!(
                "load.half_width must be positive, got {}",
                self.load.half_width
            )));
        }

        if self.frequencies.values_hz.is_empty() {
            return Err(invalid("frequencies.values_hz must not be empty"));
        }
        for &f in &self.frequencies.values_hz {
            if !(f.is_finite() && f > 0.0) {
                return Err(invalid(format!("frequencies must be positive, got {f}")));
            }
        }

        if self.output.surface_samples < 2 {
            return Err(invalid("output.surface_samples must be at least 2"));
        }
        for &deg in &self.output.phase_angles_deg {
            if !(0.0..360.0).contains(&deg) {
                return Err(invalid(format!(
                    "phase angles must lie in [0, 360), got {deg}"
                )));
            }
        }

        let (mesh, symmetric_default) = match (&self.halfspace, &self.mesh) {
            (Some(h), None) => {
                let mesh = build_halfspace_mesh(h, &self.materials, ModelSpan::SymmetricHalf)?;
                (mesh, true)
            }
            (None, Some(tables)) => (build_explicit_mesh(tables, &self.materials)?, false),
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "config provides both [halfspace] and [mesh]; choose one",
                ))
            }
            (None, None) => {
                return Err(invalid(
                    "config provides neither [halfspace] nor [mesh]; one is required",
                ))
            }
        };
        mesh.validate().map_err(|e| invalid(format!("mesh: {e}")))?;

        if let Some(study) = &self.study {
            if self.halfspace.is_none() {
                return Err(invalid(
                    "[study] needs the parametric [halfspace] model to vary its resolution",
                ));
            }
            if !self.output.oracle {
                return Err(invalid("[study] requires output.oracle = true"));
            }
            if study.cases.is_empty() {
                return Err(invalid("[study] has no cases"));
            }
            for case in &study.cases {
                if !(case.frequency_hz.is_finite() && case.frequency_hz > 0.0) {
                    return Err(invalid(format!(
                        "study frequency must be positive, got {}",
                        case.frequency_hz
                    )));
                }
                if case.values.is_empty() {
                    return Err(invalid(format!(
                        "study case at {} Hz has no values",
                        case.frequency_hz
                    )));
                }
                if case.values.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid(format!(
                        "study values must be strictly increasing, got {:?}",
                        case.values
                    )));
                }
                for &v in &case.values {
                    match study.axis {
                        StudyAxis::RadialSteps if v < 2 => {
                            return Err(invalid("study radial step counts must be at least 2"))
                        }
                        StudyAxis::GllPoints if !(2..=65).contains(&v) => {
                            return Err(invalid("study point counts must lie in 2..=65"))
                        }
                        _ => {}
                    }
                }
            }
        }

        Ok(Model {
            mesh,
            load: StripLoad {
                pressure: self.load.pressure,
                half_width: self.load.half_width,
            },
            frequencies_hz: self.frequencies.values_hz,
            output: self.output,
            symmetric: self.symmetric.unwrap_or(symmetric_default),
            study: self.study,
            halfspace: self.halfspace,
        })
    }
}

/// Whether the parametric model spans the full strip width or only the
/// symmetric half with the mirror plane at x = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSpan {
    SymmetricHalf,
    Full,
}

/// Builds the parametric half-space mesh.
///
/// Symmetric half: a counterclockwise square loop `[0, L] x [-L, 0]` walked
/// from the origin down the mirror plane, across the bottom, up the far
/// side, and back along the free surface. Every element on the bottom and
/// right edges is continued outward as its own single-element unbounded
/// wedge scaled from the strip center at the origin, reusing the edge's
/// nodes so interior and exterior couple through shared boundary dofs; the
/// wedge fan's open flanks then lie exactly on the mirror plane and the
/// free surface. The full span widens the square to `[-L, L]` and fans out
/// all three buried edges instead.
pub fn build_halfspace_mesh(
    p: &HalfspaceParams,
    materials: &[Material],
    span: ModelSpan,
) -> Result<Mesh, ConfigError> {
    if !(p.domain_size.is_finite() && p.domain_size > 0.0) {
        return Err(invalid(format!(
            "halfspace.domain_size must be positive, got {}",
            p.domain_size
        )));
    }
    if p.elements_per_edge == 0 {
        return Err(invalid("halfspace.elements_per_edge must be at least 1"));
    }
    if !(2..=65).contains(&p.gll_points) {
        return Err(invalid(format!(
            "halfspace.gll_points must lie in 2..=65, got {}",
            p.gll_points
        )));
    }
    if p.material >= materials.len() {
        return Err(invalid(format!(
            "halfspace.material index {} out of range ({} materials)",
            p.material,
            materials.len()
        )));
    }
    let l = p.domain_size;
    let epe = p.elements_per_edge;

    // Corner loop and per-edge element counts; counterclockwise around the
    // bounded region, starting at the top of the buried left edge.
    let (corners, counts): ([[f64; 2]; 4], [usize; 4]) = match span {
        ModelSpan::SymmetricHalf => (
            [[0.0, 0.0], [0.0, -l], [l, -l], [l, 0.0]],
            [epe, epe, epe, epe],
        ),
        ModelSpan::Full => (
            [[-l, 0.0], [-l, -l], [l, -l], [l, 0.0]],
            [epe, 2 * epe, epe, 2 * epe],
        ),
    };
    // Edges whose elements are continued into the unbounded exterior.
    let exterior_edges: &[usize] = match span {
        ModelSpan::SymmetricHalf => &[1, 2],
        ModelSpan::Full => &[0, 1, 2],
    };

    let basis = ReferenceBasis::gauss_lobatto(p.gll_points - 1)
        .map_err(|e| invalid(format!("halfspace.gll_points: {e}")))?;
    // Element-local node fractions in [0, 1]; endpoints are exact so shared
    // nodes and surface coordinates come out exact too.
    let fractions: Vec<f64> = basis.nodes().iter().map(|&eta| 0.5 * (eta + 1.0)).collect();

    let mut nodes: Vec<[f64; 2]> = Vec::new();
    let mut elements: Vec<BoundaryElement> = Vec::new();
    let total: usize = counts.iter().sum();
    let mut edge_first_element = [0usize; 4];
    for (edge, &count) in counts.iter().enumerate() {
        edge_first_element[edge] = elements.len();
        let a = corners[edge];
        let b = corners[(edge + 1) % 4];
        for k in 0..count {
            let t0 = k as f64 / count as f64;
            let t1 = (k + 1) as f64 / count as f64;
            let lo = [a[0] + (b[0] - a[0]) * t0, a[1] + (b[1] - a[1]) * t0];
            let hi = [a[0] + (b[0] - a[0]) * t1, a[1] + (b[1] - a[1]) * t1];
            let mut ids = Vec::with_capacity(fractions.len());
            for (j, &t) in fractions.iter().enumerate() {
                if j == 0 {
                    if nodes.is_empty() {
                        nodes.push(lo);
                        ids.push(0);
                    } else {
                        ids.push(nodes.len() - 1);
                    }
                } else if j == fractions.len() - 1 && elements.len() == total - 1 {
                    ids.push(0);
                } else {
                    nodes.push([lo[0] + (hi[0] - lo[0]) * t, lo[1] + (hi[1] - lo[1]) * t]);
                    ids.push(nodes.len() - 1);
                }
            }
            elements.push(BoundaryElement { nodes: ids });
        }
    }

    let material = &materials[p.material];
    let zeta = material.damping_ratio;
    let centroid = match span {
        ModelSpan::SymmetricHalf => ScalingCenter { x: l / 2.0, y: -l / 2.0 },
        ModelSpan::Full => ScalingCenter { x: 0.0, y: -l / 2.0 },
    };
    let mut subdomains = vec![Subdomain {
        kind: SubdomainKind::Bounded,
        center: centroid,
        elements: (0..total).collect(),
        material: p.material,
        grid: RadialGrid::new(p.bounded_start, p.radial_steps),
        damping: DampingProfile::Constant { zeta },
    }];
    // The exterior fan: one duplicate element record per buried edge element,
    // reusing its nodes so interior and exterior couple through shared
    // boundary dofs. All wedges are scaled from the strip center, so their
    // radial stations line up along shared flanks; condensing them as one
    // radial system (coupled) keeps the exterior continuous across flanks,
    // while separate wedges leave the flanks traction-free beyond the
    // interface.
    let unbounded = |elements: Vec<usize>| Subdomain {
        kind: SubdomainKind::Unbounded,
        center: ScalingCenter { x: 0.0, y: 0.0 },
        elements,
        material: p.material,
        grid: RadialGrid::new(p.unbounded_start, p.radial_steps),
        damping: DampingProfile::Linear {
            zeta_start: p.truncation_damping,
            zeta_end: zeta,
        },
    };
    let mut fan_elements = Vec::new();
    for &edge in exterior_edges {
        for k in 0..counts[edge] {
            let src = edge_first_element[edge] + k;
            let dup = elements.len();
            elements.push(BoundaryElement {
                nodes: elements[src].nodes.clone(),
            });
            if p.coupled_exterior {
                fan_elements.push(dup);
            } else {
                subdomains.push(unbounded(vec![dup]));
            }
        }
    }
    if p.coupled_exterior {
        subdomains.push(unbounded(fan_elements));
    }

    Ok(Mesh {
        nodes,
        elements,
        materials: materials.to_vec(),
        subdomains,
    })
}

fn build_explicit_mesh(tables: &MeshTables, materials: &[Material]) -> Result<Mesh, ConfigError> {
    let mut nodes = vec![None; tables.nodes.len()];
    for row in &tables.nodes {
        let slot = nodes.get_mut(row.id).ok_or_else(|| {
            invalid(format!(
                "node id {} out of range; ids must cover 0..{}",
                row.id,
                tables.nodes.len()
            ))
        })?;
        if slot.replace([row.x, row.y]).is_some() {
            return Err(invalid(format!("node id {} appears twice", row.id)));
        }
    }
    let nodes: Vec<[f64; 2]> = nodes.into_iter().map(Option::unwrap).collect();

    let mut elements = vec![None; tables.elements.len()];
    for row in &tables.elements {
        let slot = elements.get_mut(row.id).ok_or_else(|| {
            invalid(format!(
                "element id {} out of range; ids must cover 0..{}",
                row.id,
                tables.elements.len()
            ))
        })?;
        let elem = BoundaryElement {
            nodes: row.nodes.clone(),
        };
        if slot.replace(elem).is_some() {
            return Err(invalid(format!("element id {} appears twice", row.id)));
        }
    }
    let elements: Vec<BoundaryElement> = elements.into_iter().map(Option::unwrap).collect();

    let mut subdomains = Vec::with_capacity(tables.subdomains.len());
    for (s, row) in tables.subdomains.iter().enumerate() {
        let material = materials.get(row.material).ok_or_else(|| {
            invalid(format!(
                "subdomain {s} references material {} of {}",
                row.material,
                materials.len()
            ))
        })?;
        let xi_start = row.radial_start.unwrap_or(match row.kind {
            SubdomainKind::Bounded => default_bounded_start(),
            SubdomainKind::Unbounded => default_unbounded_start(),
        });
        subdomains.push(Subdomain {
            kind: row.kind,
            center: row.center,
            elements: row.elements.clone(),
            material: row.material,
            grid: RadialGrid::new(xi_start, row.radial_steps),
            damping: row.damping.unwrap_or(DampingProfile::Constant {
                zeta: material.damping_ratio,
            }),
        });
    }

    Ok(Mesh {
        nodes,
        elements,
        materials: materials.to_vec(),
        subdomains,
    })
}

/// Renders a mesh back into the explicit `[mesh]` TOML form. Handy for
/// turning a parametric model into an editable starting point.
pub fn mesh_to_toml(mesh: &Mesh) -> String {
    let mut s = String::new();
    for (i, n) in mesh.nodes.iter().enumerate() {
        let _ = writeln!(
            s,
            "[[mesh.nodes]]\nid = {i}\nx = {x:?}\ny = {y:?}\n",
            x = n[0],
            y = n[1]
        );
    }
    for (i, e) in mesh.elements.iter().enumerate() {
        let _ = writeln!(s, "[[mesh.elements]]\nid = {i}\nnodes = {:?}\n", e.nodes);
    }
    for sub in &mesh.subdomains {
        let kind = match sub.kind {
            SubdomainKind::Bounded => "bounded",
            SubdomainKind::Unbounded => "unbounded",
        };
        let _ = writeln!(
            s,
            "[[mesh.subdomains]]\nkind = \"{kind}\"\ncenter = {{ x = {x:?}, y = {y:?} }}\nelements = {elems:?}\nmaterial = {mat}\nradial_steps = {steps}\nradial_start = {start:?}",
            x = sub.center.x,
            y = sub.center.y,
            elems = sub.elements,
            mat = sub.material,
            steps = sub.grid.n_steps,
            start = sub.grid.xi_start,
        );
        let _ = match sub.damping {
            DampingProfile::Constant { zeta } => {
                writeln!(s, "damping = {{ kind = \"constant\", zeta = {zeta:?} }}\n")
            }
            DampingProfile::Linear { zeta_start, zeta_end } => writeln!(
                s,
                "damping = {{ kind = \"linear\", zeta_start = {zeta_start:?}, zeta_end = {zeta_end:?} }}\n"
            ),
        };
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        [[materials]]
        young_modulus = 10e9
        poisson_ratio = 0.2
        density = 2500.0
        damping_ratio = 0.05

        [halfspace]
        domain_size = 120.0
        elements_per_edge = 4
        gll_points = 10

        [load]
        pressure = 1e9
        half_width = 15.0

        [frequencies]
        values_hz = [15.0, 25.0, 35.0]
    "#;

    #[test]
    fn parametric_halfspace_resolves() {
        let model = FileConfig::parse(BASE).unwrap().resolve().unwrap();
        // Closed loop of 16 elements with 10 points each: 16 * 9 shared
        // nodes; the exterior duplicates 8 elements without adding nodes.
        assert_eq!(model.mesh.nodes.len(), 144);
        assert_eq!(model.mesh.elements.len(), 24);
        assert_eq!(model.mesh.subdomains.len(), 2, "bounded square plus coupled fan");
        assert!(model.symmetric);
        assert_eq!(model.output.surface_samples, 97);
        assert!(model.halfspace.is_some());

        let bounded = &model.mesh.subdomains[0];
        assert_eq!(bounded.kind, SubdomainKind::Bounded);
        assert_eq!(bounded.center, ScalingCenter { x: 60.0, y: -60.0 });
        assert_eq!(bounded.elements.len(), 16);

        let fan = &model.mesh.subdomains[1];
        assert_eq!(fan.kind, SubdomainKind::Unbounded);
        assert_eq!(fan.center, ScalingCenter { x: 0.0, y: 0.0 });
        assert_eq!(fan.elements, (16..24).collect::<Vec<_>>());
        assert!(matches!(
            fan.damping,
            DampingProfile::Linear { zeta_start, zeta_end }
                if zeta_start == 1.0 && zeta_end == 0.05
        ));
        // Exterior elements alias the buried edges' nodes.
        assert_eq!(
            model.mesh.elements[16].nodes,
            model.mesh.elements[4].nodes
        );

        // Surface nodes are exact: the top edge runs right to left at y = 0.
        let surface: Vec<usize> = (0..model.mesh.nodes.len())
            .filter(|&n| model.mesh.nodes[n][1] == 0.0)
            .collect();
        assert_eq!(surface.len(), 37, "4 elements of degree 9 on the surface");
        assert!(surface.iter().all(|&n| {
            let x = model.mesh.nodes[n][0];
            (0.0..=120.0).contains(&x)
        }));
    }

    #[test]
    fn split_exterior_condenses_each_wedge_separately() {
        let text = BASE.replace("gll_points = 10", "gll_points = 10\ncoupled_exterior = false");
        let model = FileConfig::parse(&text).unwrap().resolve().unwrap();
        model.mesh.validate().unwrap();
        assert_eq!(model.mesh.subdomains.len(), 9, "bounded square plus 8 wedges");
        for (w, wedge) in model.mesh.subdomains[1..].iter().enumerate() {
            assert_eq!(wedge.kind, SubdomainKind::Unbounded);
            assert_eq!(wedge.center, ScalingCenter { x: 0.0, y: 0.0 });
            assert_eq!(wedge.elements, vec![16 + w]);
        }
        // Same nodes and elements either way; only the grouping differs.
        let coupled = FileConfig::parse(BASE).unwrap().resolve().unwrap();
        assert_eq!(coupled.mesh.nodes, model.mesh.nodes);
        assert_eq!(coupled.mesh.elements.len(), model.mesh.elements.len());
    }

    #[test]
    fn full_span_mirrors_the_half_model() {
        let cfg = FileConfig::parse(BASE).unwrap();
        let mesh = build_halfspace_mesh(
            cfg.halfspace.as_ref().unwrap(),
            &cfg.materials,
            ModelSpan::Full,
        )
        .unwrap();
        mesh.validate().unwrap();
        // 24 loop elements (4 + 8 + 4 + 8) and 16 fan duplicates.
        assert_eq!(mesh.elements.len(), 40);
        assert_eq!(mesh.subdomains.len(), 2);
        assert_eq!(mesh.subdomains[1].elements.len(), 16);
        assert!(mesh.nodes.iter().any(|n| n[0] == 0.0 && n[1] == 0.0));
        assert!(mesh.nodes.iter().any(|n| n[0] == -120.0));
    }

    #[test]
    fn resolved_mesh_passes_validation_and_load_covers_elements() {
        let model = FileConfig::parse(BASE).unwrap().resolve().unwrap();
        model.mesh.validate().unwrap();
        assert_eq!(model.load.pressure, 1e9);
        assert_eq!(model.load.half_width, 15.0);
    }

    #[test]
    fn mesh_and_halfspace_are_mutually_exclusive() {
        let text = format!(
            "{BASE}\n[[mesh.nodes]]\nid = 0\nx = 0.0\ny = 0.0\n\
             [[mesh.elements]]\nid = 0\nnodes = [0]\n\
             [[mesh.subdomains]]\nkind = \"bounded\"\ncenter = {{ x = 0.0, y = 0.0 }}\nelements = [0]\n"
        );
        let err = FileConfig::parse(&text).unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("choose one"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{BASE}\ntypo_key = 1\n");
        assert!(matches!(
            FileConfig::parse(&text),
            Err(ConfigError::Parse(_))
        ));
        let text = BASE.replace("domain_size", "domain_szie");
        assert!(matches!(
            FileConfig::parse(&text),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn bad_values_are_rejected_with_context() {
        let cases = [
            ("values_hz = [15.0, 25.0, 35.0]", "values_hz = []", "values_hz must not be empty"),
            ("values_hz = [15.0, 25.0, 35.0]", "values_hz = [0.0]", "must be positive"),
            ("pressure = 1e9", "pressure = 0.0", "finite and nonzero"),
            ("half_width = 15.0", "half_width = -3.0", "must be positive"),
            ("gll_points = 10", "gll_points = 1", "2..=65"),
        ];
        for (from, to, needle) in cases {
            let text = BASE.replace(from, to);
            let err = FileConfig::parse(&text).unwrap().resolve().unwrap_err();
            assert!(
                err.to_string().contains(needle),
                "replacing {from:?} with {to:?}: {err}"
            );
        }
    }

    #[test]
    fn explicit_mesh_round_trips_through_toml() {
        let cfg = FileConfig::parse(BASE).unwrap();
        let mut small = cfg.halfspace.clone().unwrap();
        small.gll_points = 3;
        small.radial_steps = 8;
        let mesh = build_halfspace_mesh(&small, &cfg.materials, ModelSpan::SymmetricHalf).unwrap();

        let text = format!(
            r#"
            [[materials]]
            young_modulus = 10e9
            poisson_ratio = 0.2
            density = 2500.0
            damping_ratio = 0.05

            {}
            [load]
            pressure = 1e9
            half_width = 15.0

            [frequencies]
            values_hz = [15.0]
            "#,
            mesh_to_toml(&mesh)
        );
        let model = FileConfig::parse(&text).unwrap().resolve().unwrap();
        assert_eq!(model.mesh.nodes, mesh.nodes);
        assert_eq!(model.mesh.elements, mesh.elements);
        assert!(!model.symmetric, "explicit meshes default to no mirror");
        let a = &model.mesh.subdomains[1];
        let b = &mesh.subdomains[1];
        assert_eq!(a.grid, b.grid);
        assert_eq!(a.damping, b.damping);
    }

    #[test]
    fn study_validation() {
        let study_ok = format!(
            "{BASE}\n[output]\noracle = true\n\n[study]\naxis = \"radial_steps\"\n\
             [[study.cases]]\nfrequency_hz = 15.0\nvalues = [27, 38, 54]\n"
        );
        let model = FileConfig::parse(&study_ok).unwrap().resolve().unwrap();
        assert_eq!(model.study.as_ref().unwrap().cases.len(), 1);

        let unsorted = study_ok.replace("[27, 38, 54]", "[38, 27, 54]");
        let err = FileConfig::parse(&unsorted).unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("strictly increasing"), "{err}");

        let no_oracle = study_ok.replace("oracle = true", "oracle = false");
        let err = FileConfig::parse(&no_oracle).unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("oracle"), "{err}");
    }

    #[test]
    fn phase_angles_must_be_in_range() {
        let text = format!("{BASE}\n[output]\nphase_angles_deg = [0.0, 360.0]\n");
        let err = FileConfig::parse(&text).unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("[0, 360)"), "{err}");
    }
}
