//! Brute-force posterior of one detection unit.

use super::UnitObservation;
use crate::codebook::MergedAlphabet;
use crate::error::{Error, Result};

/// Largest joint hypothesis count [`exact_map_unit`] accepts.
pub const EXACT_HYPOTHESIS_LIMIT: u64 = 1 << 24;

/// Exact per-user marginals and the joint MAP hypothesis of one unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactUnitPosterior {
    /// `marginals[user][q]`, each row summing to one.
    pub marginals: Vec<Vec<f64>>,
    /// Joint argmax, one column per user (first in enumeration order on ties).
    pub map: Vec<usize>,
}

/// Enumerates all `Q^J` joint hypotheses under uniform priors.
pub fn exact_map_unit(
    obs: &UnitObservation<'_>,
    n0: f64,
    alphabet: &MergedAlphabet,
) -> Result<ExactUnitPosterior> {
    let graph = alphabet.graph();
    let q = alphabet.len();
    let users = graph.users();
    let total = (q as u64).checked_pow(users as u32);
    if total.is_none_or(|t| t > EXACT_HYPOTHESIS_LIMIT) {
        return Err(Error::InstanceTooLarge(format!(
            "{q}^{users} joint hypotheses exceed the limit of {EXACT_HYPOTHESIS_LIMIT}"
        )));
    }
    let total = total.unwrap_or(0) as usize;
    let inv_n0 = 1.0 / n0;

    // Per-resource metric tables indexed by the symbols of xi(k), first
    // neighbour most significant.
    let tables: Vec<Vec<f64>> = (0..graph.resources())
        .map(|k| {
            let nb = graph.xi(k);
            let size = q.pow(nb.len() as u32);
            let mut digits = vec![0usize; nb.len()];
            (0..size)
                .map(|idx| {
                    let mut rem = idx;
                    for d in digits.iter_mut().rev() {
                        *d = rem % q;
                        rem /= q;
                    }
                    let mut r = obs.y[k];
                    for (&j, &s) in nb.iter().zip(&digits) {
                        r -= obs.gain(j, k) * alphabet.value(j, s, k);
                    }
                    -r.norm_sqr() * inv_n0
                })
                .collect()
        })
        .collect();

    let mut log_lik = Vec::with_capacity(total);
    let mut digits = vec![0usize; users];
    for _ in 0..total {
        let mut l = 0.0;
        for (k, table) in tables.iter().enumerate() {
            let idx = graph.xi(k).iter().fold(0, |acc, &j| acc * q + digits[j]);
            l += table[idx];
        }
        log_lik.push(l);
        advance(&mut digits, q);
    }

    let (best, top) =
        log_lik
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });
    let mut marginals = vec![vec![0.0; q]; users];
    digits.fill(0);
    for &l in &log_lik {
        let w = (l - top).exp();
        for (j, &d) in digits.iter().enumerate() {
            marginals[j][d] += w;
        }
        advance(&mut digits, q);
    }
    for row in &mut marginals {
        let z: f64 = row.iter().sum();
        for p in row.iter_mut() {
            *p /= z;
        }
    }
    let mut map = vec![0usize; users];
    let mut rem = best;
    for d in map.iter_mut().rev() {
        *d = rem % q;
        rem /= q;
    }
    Ok(ExactUnitPosterior { marginals, map })
}

/// User 0 most significant, last user fastest.
fn advance(digits: &mut [usize], q: usize) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < q {
            return;
        }
        *d = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::sync::Arc;

    use crate::codebook::{CodebookFamily, FactorGraph};

    fn alphabet(graph: FactorGraph) -> MergedAlphabet {
        let g = Arc::new(graph);
        let fams: Vec<_> = (1..=2)
            .map(|r| CodebookFamily::generate_phase_rotation(g.clone(), 4, r, 0.0).unwrap())
            .collect();
        MergedAlphabet::build(&fams).unwrap()
    }

    #[test]
    fn default_system_fits_the_guard() {
        let a = alphabet(FactorGraph::canonical(4, 6, 3, 2).unwrap());
        assert_eq!(9u64.pow(6), 531_441);
        assert!(9u64.pow(6) <= EXACT_HYPOTHESIS_LIMIT);
        let gains = vec![vec![Complex64::new(1.0, 0.0); 4]; 6];
        let sent = [1usize, 8, 4, 0, 6, 3];
        let mut y = vec![Complex64::new(0.0, 0.0); 4];
        for (j, &s) in sent.iter().enumerate() {
            for (k, v) in y.iter_mut().enumerate() {
                *v += a.value(j, s, k);
            }
        }
        let obs = UnitObservation {
            y: &y,
            gains: &gains,
            offset: 0,
        };
        let post = exact_map_unit(&obs, 1e-3, &a).unwrap();
        assert_eq!(post.map, sent);
    }

    #[test]
    fn oversized_instance_is_rejected() {
        let a = alphabet(FactorGraph::canonical(6, 15, 5, 2).unwrap());
        let y = vec![Complex64::new(0.0, 0.0); 6];
        let gains = vec![vec![Complex64::new(1.0, 0.0); 6]; 15];
        let obs = UnitObservation {
            y: &y,
            gains: &gains,
            offset: 0,
        };
        assert!(matches!(
            exact_map_unit(&obs, 1.0, &a),
            Err(Error::InstanceTooLarge(_))
        ));
    }

    #[test]
    fn huge_noise_gives_uniform_marginals() {
        let a = alphabet(FactorGraph::canonical(2, 1, 1, 2).unwrap());
        let y = vec![Complex64::new(0.3, 0.1); 2];
        let gains = vec![vec![Complex64::new(1.0, 0.0); 2]];
        let obs = UnitObservation {
            y: &y,
            gains: &gains,
            offset: 0,
        };
        let post = exact_map_unit(&obs, 1e15, &a).unwrap();
        for &p in &post.marginals[0] {
            assert!((p - 1.0 / 9.0).abs() < 1e-12);
        }
    }
}
