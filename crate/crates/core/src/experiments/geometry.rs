//! Diamond-shaped triangulated test geometries and their source vectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Network, SourceVector};

/// Lower corner of the embedding domain.
pub const DOMAIN_LOWER: [f64; 2] = [0.0, -1.5];
/// Upper corner of the embedding domain.
pub const DOMAIN_UPPER: [f64; 2] = [2.0, 0.5];

/// Vertices with `x ≤ SOURCE_X_MAX` carry the positive sources.
pub const SOURCE_X_MAX: f64 = 0.1;
/// Peak source strength at `(0, −0.5)`.
pub const SOURCE_PEAK: f64 = 1e4;

/// Horizontal extent of every preset: the tip sits at `x = 0`, the far
/// corner at `x = DIAMOND_LENGTH`.
const DIAMOND_LENGTH: f64 = 1.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Preset {
    /// 78 vertices, 201 edges.
    PaperDiamond,
    /// Full rhombus with about `n` vertices.
    SmallDiamond(usize),
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "paper-diamond" {
            return Ok(Preset::PaperDiamond);
        }
        if s == "small-diamond" {
            return Ok(Preset::SmallDiamond(25));
        }
        let arg = s.strip_prefix("small-diamond:").or_else(|| {
            s.strip_prefix("small-diamond(")
                .and_then(|r| r.strip_suffix(')'))
        });
        match arg.map(|a| a.trim().parse::<usize>()) {
            Some(Ok(n)) => Ok(Preset::SmallDiamond(n)),
            _ => Err(Error::Geometry(format!(
                "unknown preset '{s}' (expected paper-diamond or small-diamond[:n])"
            ))),
        }
    }
}

impl TryFrom<String> for Preset {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Preset> for String {
    fn from(p: Preset) -> String {
        p.to_string()
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::PaperDiamond => write!(f, "paper-diamond"),
            Preset::SmallDiamond(n) => write!(f, "small-diamond:{n}"),
        }
    }
}

/// Closed domain test; the diamond tip lies on the boundary `x = 0`.
pub fn in_domain(p: [f64; 2]) -> bool {
    (0..2).all(|k| p[k] >= DOMAIN_LOWER[k] && p[k] <= DOMAIN_UPPER[k])
}

/// Triangular lattice on the rhombus `0 ≤ i, j < k` with `i + j ≤ max_sum`.
///
/// Vertex `(i, j)` sits at `x = (i + j) a`, `y = −0.5 + (j − i) s/2` with
/// side `s` and `a = s √3/2`, so every edge has length `s`. Edges join
/// `(i, j)–(i+1, j)`, `(i, j)–(i, j+1)` and `(i+1, j)–(i, j+1)`.
fn triangulated_rhombus(k: usize, max_sum: usize, side: f64) -> Result<Network> {
    let a = side * 3f64.sqrt() / 2.0;
    let mut index = vec![vec![usize::MAX; k]; k];
    let mut positions = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i + j <= max_sum {
                index[i][j] = positions.len();
                positions.push([
                    (i + j) as f64 * a,
                    -0.5 + (j as f64 - i as f64) * side / 2.0,
                ]);
            }
        }
    }
    let live = |i: usize, j: usize| i < k && j < k && i + j <= max_sum;
    let mut edges = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if !live(i, j) {
                continue;
            }
            if live(i + 1, j) {
                edges.push((index[i][j], index[i + 1][j]));
            }
            if live(i, j + 1) {
                edges.push((index[i][j], index[i][j + 1]));
            }
            if live(i + 1, j) && live(i, j + 1) {
                edges.push((index[i + 1][j], index[i][j + 1]));
            }
        }
    }
    if let Some(p) = positions.iter().find(|p| !in_domain(**p)) {
        return Err(Error::Geometry(format!(
            "vertex {p:?} lies outside the domain"
        )));
    }
    Network::from_positions(positions, &edges, 1.0)
}

/// Builds the preset network with unit conductivities.
pub fn generate_diamond(preset: Preset) -> Result<Network> {
    match preset {
        Preset::PaperDiamond => {
            triangulated_rhombus(9, 14, DIAMOND_LENGTH / (14.0 * 3f64.sqrt() / 2.0))
        }
        Preset::SmallDiamond(n) => {
            let k = (n as f64).sqrt().round() as usize;
            if k < 2 {
                return Err(Error::Geometry(format!(
                    "small-diamond needs at least 4 vertices, got {n}"
                )));
            }
            let max_sum = 2 * (k - 1);
            triangulated_rhombus(
                k,
                max_sum,
                DIAMOND_LENGTH / (max_sum as f64 * 3f64.sqrt() / 2.0),
            )
        }
    }
}

/// Peak-shaped sources on the vertices with `x ≤ 0.1`, balanced by a uniform
/// sink on all other vertices.
pub fn build_sources(network: &Network) -> Result<SourceVector> {
    let pos = network.positions();
    let plus: Vec<bool> = pos.iter().map(|p| p[0] <= SOURCE_X_MAX).collect();
    let n_plus = plus.iter().filter(|&&b| b).count();
    if n_plus == 0 {
        return Err(Error::Geometry(format!(
            "no vertex with x <= {SOURCE_X_MAX}"
        )));
    }
    let n_minus = pos.len() - n_plus;
    if n_minus == 0 {
        return Err(Error::Geometry(
            "every vertex is a source; no sink remains".into(),
        ));
    }
    let sigma = |p: [f64; 2]| {
        SOURCE_PEAK * (-10.0 * (50.0 * p[0] * p[0] + 10.0 * (p[1] + 0.5).powi(4))).exp()
    };
    let total: f64 = pos
        .iter()
        .zip(&plus)
        .filter(|(_, &b)| b)
        .map(|(p, _)| sigma(*p))
        .sum();
    let sink = -total / n_minus as f64;
    let values = pos
        .iter()
        .zip(&plus)
        .map(|(p, &b)| if b { sigma(*p) } else { sink })
        .collect();
    SourceVector::new(values)
}
