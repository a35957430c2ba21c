//! Scenario files: JSON with explicit [re, im] complex pairs, row-major
//! matrices, and kernel blocks keyed by point-name pairs "(s,t)".

use std::collections::BTreeMap;

use serde::Deserialize;

use rkbundle::bundle::{BaseSet, Bundle, BundleMorphism};
use rkbundle::cpmap::{CpMap, MatrixAlgebra};
use rkbundle::kernel::Kernel;
use rkbundle::linalg::{cidentity, CMatrix, Pairing, C};

#[derive(Debug)]
pub enum LoadError {
    Io(String),
    Parse(String),
    Invalid(String),
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::Io(m) => write!(f, "io error: {m}"),
            LoadError::Parse(m) => write!(f, "parse error: {m}"),
            LoadError::Invalid(m) => write!(f, "invalid scenario: {m}"),
        }
    }
}

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn to_matrix(m: &JsonMatrix, field: &str) -> Result<CMatrix, LoadError> {
    let rows = m.len();
    if rows == 0 {
        return Err(LoadError::Invalid(format!("{field}: empty matrix")));
    }
    let cols = m[0].len();
    for (i, r) in m.iter().enumerate() {
        if r.len() != cols {
            return Err(LoadError::Invalid(format!(
                "{field}: row {i} has {} entries, expected {cols}",
                r.len()
            )));
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| C::new(m[i][j][0], m[i][j][1])))
}

fn to_complex_vec(v: &[[f64; 2]]) -> Vec<C> {
    v.iter().map(|p| C::new(p[0], p[1])).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub kind: String,
    pub tolerance: Option<f64>,

    // bundle+kernel
    pub points: Option<Vec<String>>,
    pub involution: Option<Vec<usize>>,
    pub fiber_dims: Option<Vec<usize>>,
    pub pairings: Option<Vec<JsonMatrix>>,
    pub blocks: Option<BTreeMap<String, JsonMatrix>>,
    pub morphism: Option<RawMorphism>,

    // grassmann
    pub ambient: Option<usize>,
    pub subspaces: Option<Vec<JsonMatrix>>,
    pub ambient_involution: Option<RawInvolution>,

    // cpmap
    pub n: Option<usize>,
    pub kraus: Option<Vec<JsonMatrix>>,
    pub domain_blocks: Option<Vec<usize>>,
    pub action: Option<Vec<JsonMatrix>>,

    // homogeneous
    pub elements: Option<Vec<JsonMatrix>>,
    pub rep: Option<Vec<JsonMatrix>>,
    pub hb_basis: Option<JsonMatrix>,
    pub cosets: Option<Vec<usize>>,
    pub membership: Option<String>,

    // gns
    pub phi: Option<Vec<[f64; 2]>>,
    pub subalgebra: Option<String>,
    pub expectation: Option<String>,
    pub group: Option<Vec<JsonMatrix>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMorphism {
    pub source: RawBundle,
    pub base_map: Vec<usize>,
    pub fiber_maps: Vec<JsonMatrix>,
    #[serde(default)]
    pub antilinear: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBundle {
    pub points: Vec<String>,
    pub involution: Option<Vec<usize>>,
    pub fiber_dims: Vec<usize>,
    pub pairings: Option<Vec<JsonMatrix>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInvolution {
    pub matrix: JsonMatrix,
    #[serde(default)]
    pub antilinear: bool,
}

/// A parsed and validated scenario, ready for the suite runner.
pub enum Scenario {
    Kernel {
        kernel: Kernel,
        morphism: Option<BundleMorphism>,
        tolerance: Option<f64>,
    },
    Grassmann {
        subspaces: Vec<rkbundle::linalg::Subspace>,
        involution: Option<rkbundle::grassmann::InvolutionIsometry>,
        tolerance: Option<f64>,
    },
    CpMap {
        map: CpMap,
        tolerance: Option<f64>,
    },
    Homogeneous {
        elements: Vec<CMatrix>,
        rep: Vec<CMatrix>,
        hb_basis: CMatrix,
        cosets: Vec<usize>,
        membership: String,
        tolerance: Option<f64>,
    },
    Gns {
        algebra: MatrixAlgebra,
        phi: Vec<C>,
        subalgebra: String,
        expectation: String,
        group: Vec<CMatrix>,
        cosets: Vec<usize>,
        tolerance: Option<f64>,
    },
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Kernel { .. } => "bundle+kernel",
            Scenario::Grassmann { .. } => "grassmann",
            Scenario::CpMap { .. } => "cpmap",
            Scenario::Homogeneous { .. } => "homogeneous",
            Scenario::Gns { .. } => "gns",
        }
    }

    pub fn tolerance(&self) -> Option<f64> {
        match self {
            Scenario::Kernel { tolerance, .. }
            | Scenario::Grassmann { tolerance, .. }
            | Scenario::CpMap { tolerance, .. }
            | Scenario::Homogeneous { tolerance, .. }
            | Scenario::Gns { tolerance, .. } => *tolerance,
        }
    }
}

pub fn load_scenario_str(text: &str) -> Result<Scenario, LoadError> {
    let raw: RawScenario =
        serde_json::from_str(text).map_err(|e| LoadError::Parse(e.to_string()))?;
    build_scenario(raw)
}

pub fn load_scenario(path: &std::path::Path) -> Result<Scenario, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
    load_scenario_str(&text)
}

fn build_bundle(
    points: Vec<String>,
    involution: Option<Vec<usize>>,
    fiber_dims: Vec<usize>,
    pairings: Option<Vec<JsonMatrix>>,
) -> Result<Bundle, LoadError> {
    let n = points.len();
    if fiber_dims.len() != n {
        return Err(LoadError::Invalid("fiber_dims: one entry per point required".into()));
    }
    let involution = involution.unwrap_or_else(|| (0..n).collect());
    let base = BaseSet::new(points, involution)
        .map_err(|e| LoadError::Invalid(format!("involution: {e}")))?;
    let pairings = match pairings {
        Some(raw) => {
            if raw.len() != n {
                return Err(LoadError::Invalid("pairings: one matrix per point required".into()));
            }
            raw.iter()
                .enumerate()
                .map(|(i, m)| {
                    let mat = to_matrix(m, &format!("pairings[{i}]"))?;
                    Pairing::new(mat).map_err(|e| LoadError::Invalid(format!("pairings[{i}]: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        None => fiber_dims
            .iter()
            .map(|&d| Pairing::new(cidentity(d)).expect("identity pairing"))
            .collect(),
    };
    Bundle::new(base, fiber_dims, pairings).map_err(|e| LoadError::Invalid(e.to_string()))
}

fn build_scenario(raw: RawScenario) -> Result<Scenario, LoadError> {
    match raw.kind.as_str() {
        "bundle+kernel" => {
            let points = raw
                .points
                .ok_or_else(|| LoadError::Invalid("points: required".into()))?;
            let dims = raw
                .fiber_dims
                .ok_or_else(|| LoadError::Invalid("fiber_dims: required".into()))?;
            let bundle = build_bundle(points, raw.involution, dims, raw.pairings)?;
            let blocks = raw
                .blocks
                .ok_or_else(|| LoadError::Invalid("blocks: required".into()))?;
            let n = bundle.n_points();
            let mut parsed = vec![None; n * n];
            for (key, m) in &blocks {
                let inner = key
                    .strip_prefix('(')
                    .and_then(|k| k.strip_suffix(')'))
                    .ok_or_else(|| {
                        LoadError::Invalid(format!("blocks: key '{key}' is not of the form (s,t)"))
                    })?;
                let (s_name, t_name) = inner.split_once(',').ok_or_else(|| {
                    LoadError::Invalid(format!("blocks: key '{key}' is not of the form (s,t)"))
                })?;
                let s = bundle.base().index_of(s_name.trim()).ok_or_else(|| {
                    LoadError::Invalid(format!("blocks: unknown point '{}'", s_name.trim()))
                })?;
                let t = bundle.base().index_of(t_name.trim()).ok_or_else(|| {
                    LoadError::Invalid(format!("blocks: unknown point '{}'", t_name.trim()))
                })?;
                parsed[s * n + t] = Some(to_matrix(m, &format!("blocks[{key}]"))?);
            }
            let mut all = Vec::with_capacity(n * n);
            for s in 0..n {
                for t in 0..n {
                    all.push(parsed[s * n + t].take().ok_or_else(|| {
                        LoadError::Invalid(format!(
                            "blocks: missing block ({}, {})",
                            bundle.base().id(s),
                            bundle.base().id(t)
                        ))
                    })?);
                }
            }
            let morphism = match raw.morphism {
                Some(rm) => {
                    let source = build_bundle(
                        rm.source.points,
                        rm.source.involution,
                        rm.source.fiber_dims,
                        rm.source.pairings,
                    )?;
                    let fiber_maps = rm
                        .fiber_maps
                        .iter()
                        .enumerate()
                        .map(|(i, m)| to_matrix(m, &format!("morphism.fiber_maps[{i}]")))
                        .collect::<Result<Vec<_>, _>>()?;
                    Some(
                        BundleMorphism::new(
                            source,
                            bundle.clone(),
                            rm.base_map,
                            fiber_maps,
                            rm.antilinear,
                        )
                        .map_err(|e| LoadError::Invalid(format!("morphism: {e}")))?,
                    )
                }
                None => None,
            };
            let kernel = Kernel::from_blocks(bundle, all)
                .map_err(|e| LoadError::Invalid(format!("blocks: {e}")))?;
            Ok(Scenario::Kernel { kernel, morphism, tolerance: raw.tolerance })
        }
        "grassmann" => {
            let ambient = raw
                .ambient
                .ok_or_else(|| LoadError::Invalid("ambient: required".into()))?;
            let raw_subspaces = raw
                .subspaces
                .ok_or_else(|| LoadError::Invalid("subspaces: required".into()))?;
            let mut subspaces = Vec::with_capacity(raw_subspaces.len());
            for (i, m) in raw_subspaces.iter().enumerate() {
                let mat = to_matrix(m, &format!("subspaces[{i}]"))?;
                if mat.nrows() != ambient {
                    return Err(LoadError::Invalid(format!(
                        "subspaces[{i}]: {} rows, ambient is {ambient}",
                        mat.nrows()
                    )));
                }
                subspaces.push(rkbundle::linalg::orthonormal_basis(&mat));
            }
            let involution = match raw.ambient_involution {
                Some(ri) => {
                    let m = to_matrix(&ri.matrix, "ambient_involution.matrix")?;
                    Some(
                        rkbundle::grassmann::InvolutionIsometry::new(m, ri.antilinear)
                            .map_err(|e| LoadError::Invalid(format!("ambient_involution: {e}")))?,
                    )
                }
                None => None,
            };
            Ok(Scenario::Grassmann { subspaces, involution, tolerance: raw.tolerance })
        }
        "cpmap" => {
            let map = if let Some(kraus) = raw.kraus {
                let n = raw.n.ok_or_else(|| LoadError::Invalid("n: required with kraus".into()))?;
                let ops = kraus
                    .iter()
                    .enumerate()
                    .map(|(i, m)| to_matrix(m, &format!("kraus[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                CpMap::from_kraus(n, &ops).map_err(|e| LoadError::Invalid(e.to_string()))?
            } else if let (Some(blocks), Some(action)) = (raw.domain_blocks, raw.action) {
                let domain = MatrixAlgebra::direct_sum(blocks);
                let images = action
                    .iter()
                    .enumerate()
                    .map(|(i, m)| to_matrix(m, &format!("action[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let m = images
                    .first()
                    .map(|x| x.nrows())
                    .ok_or_else(|| LoadError::Invalid("action: empty".into()))?;
                CpMap::new(domain, m, images).map_err(|e| LoadError::Invalid(e.to_string()))?
            } else {
                return Err(LoadError::Invalid(
                    "cpmap: either kraus+n or domain_blocks+action required".into(),
                ));
            };
            Ok(Scenario::CpMap { map, tolerance: raw.tolerance })
        }
        "homogeneous" => {
            let elements = parse_matrices(raw.elements, "elements")?;
            let rep = match raw.rep {
                Some(r) => parse_matrices(Some(r), "rep")?,
                None => elements.clone(),
            };
            let hb = raw
                .hb_basis
                .ok_or_else(|| LoadError::Invalid("hb_basis: required".into()))?;
            let hb_basis = to_matrix(&hb, "hb_basis")?;
            let cosets = raw
                .cosets
                .ok_or_else(|| LoadError::Invalid("cosets: required".into()))?;
            let membership = raw.membership.unwrap_or_else(|| "diagonal".into());
            Ok(Scenario::Homogeneous {
                elements,
                rep,
                hb_basis,
                cosets,
                membership,
                tolerance: raw.tolerance,
            })
        }
        "gns" => {
            let n = raw.n.ok_or_else(|| LoadError::Invalid("n: required".into()))?;
            let phi = raw.phi.ok_or_else(|| LoadError::Invalid("phi: required".into()))?;
            if phi.len() != n * n {
                return Err(LoadError::Invalid(format!(
                    "phi: {} values, expected {} (matrix-unit basis of M_{n})",
                    phi.len(),
                    n * n
                )));
            }
            let group = parse_matrices(raw.group, "group")?;
            let cosets = raw
                .cosets
                .ok_or_else(|| LoadError::Invalid("cosets: required".into()))?;
            Ok(Scenario::Gns {
                algebra: MatrixAlgebra::full(n),
                phi: to_complex_vec(&phi),
                subalgebra: raw.subalgebra.unwrap_or_else(|| "diagonal".into()),
                expectation: raw.expectation.unwrap_or_else(|| "diagonal".into()),
                group,
                cosets,
                tolerance: raw.tolerance,
            })
        }
        other => Err(LoadError::Invalid(format!(
            "kind: unknown scenario kind '{other}' (expected bundle+kernel, grassmann, cpmap, homogeneous, or gns)"
        ))),
    }
}

fn parse_matrices(
    raw: Option<Vec<JsonMatrix>>,
    field: &str,
) -> Result<Vec<CMatrix>, LoadError> {
    let raw = raw.ok_or_else(|| LoadError::Invalid(format!("{field}: required")))?;
    raw.iter()
        .enumerate()
        .map(|(i, m)| to_matrix(m, &format!("{field}[{i}]")))
        .collect()
}
