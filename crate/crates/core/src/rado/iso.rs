use serde::{Deserialize, Serialize};

use super::{RadoError, Result};
use crate::multigraph::{Multigraph, NodeId, WitnessRequest};

/// Finite map `a_i ↦ b_i` between two multigraphs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PartialIso {
    pub pairs: Vec<(NodeId, NodeId)>,
}

impl PartialIso {
    pub fn new(pairs: Vec<(NodeId, NodeId)>) -> Self {
        PartialIso { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn image(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.pairs.iter().map(|p| p.1)
    }

    /// Checks injectivity, node ranges and that every pair of mapped nodes
    /// has the same multiplicity on both sides.
    pub fn verify(&self, g1: &Multigraph, g2: &Multigraph) -> Result<()> {
        for (i, &(a, b)) in self.pairs.iter().enumerate() {
            for &(a2, b2) in &self.pairs[..i] {
                if a == a2 || b == b2 {
                    return Err(RadoError::InvalidIso(format!(
                        "({a} ↦ {b}) collides with ({a2} ↦ {b2})"
                    )));
                }
                let (m1, m2) = (g1.multiplicity(a, a2)?, g2.multiplicity(b, b2)?);
                if m1 != m2 {
                    return Err(RadoError::InvalidIso(format!(
                        "mult({a}, {a2}) = {m1} but mult({b}, {b2}) = {m2}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forth,
    Back,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailurePoint {
    pub step: usize,
    pub direction: Direction,
    /// The node that could not be matched, on the side being extended from.
    pub node: NodeId,
    /// Its multiplicities against the already mapped tuple.
    pub vector: Vec<u32>,
    pub partial: PartialIso,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BackForthOutcome {
    Extended { iso: PartialIso, steps_taken: usize },
    Failed(FailurePoint),
}

impl BackForthOutcome {
    pub fn is_extended(&self) -> bool {
        matches!(self, BackForthOutcome::Extended { .. })
    }
}

/// Smallest node of `g` outside `used`.
fn least_unused(g: &Multigraph, used: &[NodeId]) -> Option<NodeId> {
    (1..=g.node_count() as NodeId).find(|v| !used.contains(v))
}

/// Runs `steps` rounds of back-and-forth starting from `iso`. Even steps
/// map the least unmapped node of `g1` forward, odd steps pull back the
/// least unmapped node of `g2`; targets are the smallest node with the same
/// multiplicity vector. A side with nothing left to map skips its turn, and
/// the run stops early once both sides are exhausted.
pub fn back_and_forth_extend(
    g1: &Multigraph,
    g2: &Multigraph,
    iso: &PartialIso,
    steps: usize,
) -> Result<BackForthOutcome> {
    iso.verify(g1, g2)?;
    let mut iso = iso.clone();
    let mut dom: Vec<NodeId> = iso.domain().collect();
    let mut img: Vec<NodeId> = iso.image().collect();
    let mut taken = 0;
    for step in 0..steps {
        let (direction, from, to, src, dst) = if step % 2 == 0 {
            (Direction::Forth, g1, g2, &dom, &img)
        } else {
            (Direction::Back, g2, g1, &img, &dom)
        };
        let Some(node) = least_unused(from, src) else {
            if least_unused(to, dst).is_none() {
                break;
            }
            taken += 1;
            continue;
        };
        let vector: Vec<u32> = src
            .iter()
            .map(|&s| from.multiplicity(node, s))
            .collect::<std::result::Result<_, _>>()?;
        let request = WitnessRequest::new(dst.iter().copied().zip(vector.iter().copied()).collect())?;
        match to.witness_satisfied(&request)? {
            Some(target) => {
                let pair = match direction {
                    Direction::Forth => (node, target),
                    Direction::Back => (target, node),
                };
                iso.pairs.push(pair);
                dom.push(pair.0);
                img.push(pair.1);
                taken += 1;
            }
            None => {
                return Ok(BackForthOutcome::Failed(FailurePoint {
                    step,
                    direction,
                    node,
                    vector,
                    partial: iso,
                }))
            }
        }
    }
    Ok(BackForthOutcome::Extended {
        iso,
        steps_taken: taken,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rado::{er_generate, ErConfig};
    use crate::rational::Rational;
    use crate::seeding::rng_from_seed;

    fn weighted_triangle() -> Multigraph {
        let mut g = Multigraph::empty(3);
        g.add_edges(1, 2, 1).unwrap();
        g.add_edges(2, 3, 2).unwrap();
        g.add_edges(1, 3, 3).unwrap();
        g
    }

    #[test]
    fn triangle_extends_to_isomorphism() {
        let g = weighted_triangle();
        let out = back_and_forth_extend(&g, &g, &PartialIso::default(), 10).unwrap();
        let BackForthOutcome::Extended { iso, steps_taken } = out else {
            panic!("{out:?}")
        };
        assert_eq!(iso.pairs, vec![(1, 1), (2, 2), (3, 3)]);
        assert_eq!(steps_taken, 3);
        iso.verify(&g, &g).unwrap();

        // Relabelled copy: 1 ↔ 3 swapped.
        let mut h = Multigraph::empty(3);
        h.add_edges(3, 2, 1).unwrap();
        h.add_edges(2, 1, 2).unwrap();
        h.add_edges(3, 1, 3).unwrap();
        // The greedy first choice 1 ↦ 1 is wrong for this labelling and the
        // next back step cannot be matched.
        let out = back_and_forth_extend(&g, &h, &PartialIso::default(), 3).unwrap();
        let BackForthOutcome::Failed(f) = out else {
            panic!("{out:?}")
        };
        assert_eq!((f.step, f.node, f.vector), (1, 2, vec![2]));
        f.partial.verify(&g, &h).unwrap();
        let iso = PartialIso::new(vec![(1, 3), (2, 2), (3, 1)]);
        iso.verify(&g, &h).unwrap();
        let out = back_and_forth_extend(&g, &h, &iso, 2).unwrap();
        assert_eq!(out, BackForthOutcome::Extended { iso, steps_taken: 0 });
    }

    #[test]
    fn mismatch_fails() {
        let g1 = Multigraph::from_edges(&[(1, 2)], 2).unwrap();
        let g2 = Multigraph::from_edges(&[(1, 2), (1, 2)], 2).unwrap();
        let out = back_and_forth_extend(&g1, &g2, &PartialIso::default(), 4).unwrap();
        let BackForthOutcome::Failed(f) = out else {
            panic!("{out:?}")
        };
        assert_eq!(
            (f.step, f.direction, f.node, f.vector.clone()),
            (1, Direction::Back, 2, vec![2])
        );
        assert_eq!(f.partial.pairs, vec![(1, 1)]);
    }

    #[test]
    fn invalid_start_is_rejected() {
        let g = weighted_triangle();
        assert!(back_and_forth_extend(&g, &g, &PartialIso::new(vec![(1, 2), (2, 1)]), 1).is_ok());
        assert!(back_and_forth_extend(&g, &g, &PartialIso::new(vec![(1, 2), (3, 1)]), 1).is_err());
        assert!(back_and_forth_extend(&g, &g, &PartialIso::new(vec![(1, 2), (1, 3)]), 1).is_err());
    }

    #[test]
    fn er_pair_extension_verifies() {
        let cfg = ErConfig::constant(400, Rational::new(1, 2));
        let g1 = er_generate(&cfg, &mut rng_from_seed(1)).unwrap();
        let g2 = er_generate(&cfg, &mut rng_from_seed(2)).unwrap();
        let out = back_and_forth_extend(&g1, &g2, &PartialIso::default(), 4).unwrap();
        match out {
            BackForthOutcome::Extended { iso, .. } => iso.verify(&g1, &g2).unwrap(),
            BackForthOutcome::Failed(f) => f.partial.verify(&g1, &g2).unwrap(),
        }
    }
}
