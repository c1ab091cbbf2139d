//! Initial conductivity vectors: spanning trees with optional closed loops
//! and perturbations, and full graphs with or without noise.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DisjointSet, Network};

fn default_delta() -> f64 {
    5.0
}

fn default_background() -> f64 {
    1e-10
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitSpec {
    /// `delta` on a spanning tree (plus `loops` closing edges), `background`
    /// elsewhere, then `epsilon` added to every edge.
    Tree {
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default = "default_background")]
        background: f64,
        #[serde(default)]
        epsilon: f64,
        #[serde(default)]
        loops: usize,
        #[serde(default)]
        seed: u64,
        /// Explicit tree as vertex pairs; generated from `seed` when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edges: Option<Vec<[usize; 2]>>,
    },
    /// The same value on every edge.
    Full {
        #[serde(default = "default_one")]
        value: f64,
    },
    /// `base + U(0, 1)` per edge.
    Noisy {
        #[serde(default = "default_one")]
        base: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Tree {
            delta: default_delta(),
            background: default_background(),
            epsilon: 0.0,
            loops: 0,
            seed: 0,
            edges: None,
        }
    }
}

impl InitSpec {
    pub fn seed(&self) -> Option<u64> {
        match self {
            InitSpec::Tree { seed, .. } | InitSpec::Noisy { seed, .. } => Some(*seed),
            InitSpec::Full { .. } => None,
        }
    }

    pub fn set_seed(&mut self, new: u64) {
        if let InitSpec::Tree { seed, .. } | InitSpec::Noisy { seed, .. } = self {
            *seed = new;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match *self {
            InitSpec::Tree {
                delta,
                background,
                epsilon,
                ..
            } => {
                if !(delta > 0.0 && delta.is_finite()) {
                    return bad(format!("tree delta must be positive, got {delta}"));
                }
                if !(background >= 0.0) || !(epsilon >= 0.0) {
                    return bad(format!(
                        "background {background} and epsilon {epsilon} must be >= 0"
                    ));
                }
            }
            InitSpec::Full { value } if !(value > 0.0 && value.is_finite()) => {
                return bad(format!("full-graph value must be positive, got {value}"));
            }
            InitSpec::Noisy { base, .. } if !(base >= 0.0 && base.is_finite()) => {
                return bad(format!("noise base must be >= 0, got {base}"));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Random spanning tree by Kruskal's algorithm on a seeded edge shuffle.
/// Returns edge indices in increasing order.
pub fn spanning_tree(network: &Network, seed: u64) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..network.n_edges()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut ds = DisjointSet::new(network.n_vertices());
    let mut tree: Vec<usize> = order
        .into_iter()
        .filter(|&k| {
            let e = network.edge(k);
            ds.union(e.i, e.j)
        })
        .collect();
    if tree.len() + 1 != network.n_vertices() {
        return Err(Error::Geometry(
            "network is not connected; no spanning tree exists".into(),
        ));
    }
    tree.sort_unstable();
    Ok(tree)
}

/// Maps vertex pairs to edge indices and checks that they form a spanning
/// tree of `network`.
pub fn tree_from_pairs(network: &Network, pairs: &[[usize; 2]]) -> Result<Vec<usize>> {
    let n = network.n_vertices();
    if pairs.len() + 1 != n {
        return Err(Error::Config(format!(
            "a spanning tree of {n} vertices has {} edges, got {}",
            n.saturating_sub(1),
            pairs.len()
        )));
    }
    let mut ds = DisjointSet::new(n);
    let mut tree = Vec::with_capacity(pairs.len());
    for &[a, b] in pairs {
        let k = network.edge_index(a, b).ok_or_else(|| {
            Error::Config(format!("tree edge ({a},{b}) is not an edge of the network"))
        })?;
        if !ds.union(a, b) {
            return Err(Error::Config(format!("tree edge ({a},{b}) closes a cycle")));
        }
        tree.push(k);
    }
    tree.sort_unstable();
    Ok(tree)
}

/// Applies `spec` to the conductivities of `network`.
pub fn init_conductivities(network: &Network, spec: &InitSpec) -> Result<Network> {
    spec.validate()?;
    let m = network.n_edges();
    let values = match spec {
        InitSpec::Tree {
            delta,
            background,
            epsilon,
            loops,
            seed,
            edges,
        } => {
            let tree = match edges {
                Some(pairs) => tree_from_pairs(network, pairs)?,
                None => spanning_tree(network, *seed)?,
            };
            let mut c = vec![*background; m];
            for &k in &tree {
                c[k] = *delta;
            }
            if *loops > 0 {
                let mut rest: Vec<usize> =
                    (0..m).filter(|k| tree.binary_search(k).is_err()).collect();
                if *loops > rest.len() {
                    return Err(Error::Config(format!(
                        "cannot close {loops} loops; only {} non-tree edges exist",
                        rest.len()
                    )));
                }
                // a separate stream so that the tree does not depend on `loops`
                rest.shuffle(&mut ChaCha8Rng::seed_from_u64(
                    seed.wrapping_add(0x9e37_79b9_7f4a_7c15),
                ));
                for &k in &rest[..*loops] {
                    c[k] = *delta;
                }
            }
            c.iter().map(|v| v + epsilon).collect()
        }
        InitSpec::Full { value } => vec![*value; m],
        InitSpec::Noisy { base, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..m).map(|_| base + rng.gen::<f64>()).collect::<Vec<_>>()
        }
    };
    network.with_conductivities(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::geometry::{generate_diamond, Preset};
    use crate::graph::cycle_count;

    fn tree(epsilon: f64, loops: usize, edges: Option<Vec<[usize; 2]>>) -> InitSpec {
        InitSpec::Tree {
            delta: 5.0,
            background: 1e-10,
            epsilon,
            loops,
            seed: 0,
            edges,
        }
    }

    fn diamond() -> Network {
        generate_diamond(Preset::PaperDiamond).unwrap()
    }

    #[test]
    fn tree_spec_sets_exactly_n_minus_one_edges() {
        let net = diamond();
        let out = init_conductivities(&net, &InitSpec::default()).unwrap();
        let c = out.conductivities();
        assert_eq!(
            c.iter().filter(|&&v| v == 5.0).count(),
            net.n_vertices() - 1
        );
        assert!(c.iter().all(|&v| v == 5.0 || v == 1e-10));
        assert_eq!(cycle_count(&out, 1e-9), 0);
    }

    #[test]
    fn epsilon_shifts_every_edge() {
        let net = diamond();
        let base = init_conductivities(&net, &InitSpec::default()).unwrap();
        let spec = tree(0.1, 0, None);
        let pert = init_conductivities(&net, &spec).unwrap();
        for (a, b) in base.conductivities().iter().zip(pert.conductivities()) {
            assert!((b - a - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn loops_add_independent_cycles() {
        let net = diamond();
        let spec = tree(0.0, 3, None);
        let out = init_conductivities(&net, &spec).unwrap();
        assert_eq!(cycle_count(&out, 1e-9), 3);
    }

    #[test]
    fn noisy_full_graph_is_reproducible() {
        let net = diamond();
        let spec = InitSpec::Noisy {
            base: 1.0,
            seed: 42,
        };
        let a = init_conductivities(&net, &spec).unwrap().conductivities();
        let b = init_conductivities(&net, &spec).unwrap().conductivities();
        assert_eq!(a, b);
        assert!(a.iter().all(|&v| (1.0..2.0).contains(&v)));
        let other = init_conductivities(
            &net,
            &InitSpec::Noisy {
                base: 1.0,
                seed: 43,
            },
        )
        .unwrap();
        assert_ne!(a, other.conductivities());
    }

    #[test]
    fn explicit_tree_is_validated() {
        let net = Network::from_positions(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            &[(0, 1), (1, 2), (0, 2)],
            1.0,
        )
        .unwrap();
        let ok = tree(0.0, 0, Some(vec![[0, 1], [2, 1]]));
        let c = init_conductivities(&net, &ok).unwrap().conductivities();
        assert_eq!(c, vec![5.0, 5.0, 1e-10]);
        let short = tree(0.0, 0, Some(vec![[0, 1]]));
        assert!(matches!(
            init_conductivities(&net, &short),
            Err(Error::Config(_))
        ));
        let net4 = Network::from_positions(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
            &[(0, 1), (1, 2), (0, 2), (2, 3)],
            1.0,
        )
        .unwrap();
        let cyclic = tree(0.0, 0, Some(vec![[0, 1], [1, 2], [0, 2]]));
        assert!(matches!(
            init_conductivities(&net4, &cyclic),
            Err(Error::Config(_))
        ));
    }
}
