//! Truncated multivariate polynomials.
//!
//! Variables are split into groups and each group carries a cap on its total
//! degree; monomials exceeding a cap are dropped. Truncation by such an ideal
//! is compatible with multiplication, so products are exact up to the caps.

use std::collections::HashMap;
use std::rc::Rc;

/// Monomial basis and multiplication table shared by all polynomials of a ring.
#[derive(Debug)]
pub struct Ring {
    group_of: Vec<usize>,
    exps: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    table: Vec<(usize, usize, usize)>,
    max_degree: usize,
}

impl Ring {
    /// `group_of[v]` is the group of variable `v`; `caps[g]` its degree cap.
    pub fn new(group_of: Vec<usize>, caps: Vec<u32>) -> Rc<Ring> {
        let nv = group_of.len();
        let mut exps = Vec::new();
        let mut cur = vec![0u8; nv];
        let mut used = vec![0u32; caps.len()];
        enumerate(0, &group_of, &caps, &mut cur, &mut used, &mut exps);
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut table = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if let Some(&k) = index.get(&sum) {
                    table.push((i, j, k));
                }
            }
        }
        let max_degree = caps.iter().map(|c| *c as usize).sum();
        Rc::new(Ring {
            group_of,
            exps,
            index,
            table,
            max_degree,
        })
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.group_of.len()
    }

    pub fn position(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

fn enumerate(
    v: usize,
    group_of: &[usize],
    caps: &[u32],
    cur: &mut Vec<u8>,
    used: &mut Vec<u32>,
    out: &mut Vec<Vec<u8>>,
) {
    if v == group_of.len() {
        out.push(cur.clone());
        return;
    }
    let g = group_of[v];
    let room = caps[g] - used[g];
    for e in 0..=room {
        cur[v] = e as u8;
        used[g] += e;
        enumerate(v + 1, group_of, caps, cur, used, out);
        used[g] -= e;
    }
    cur[v] = 0;
}

/// A polynomial over a [`Ring`].
#[derive(Debug, Clone)]
pub struct TruncPoly {
    ring: Rc<Ring>,
    c: Vec<f64>,
}

impl TruncPoly {
    pub fn zero(ring: &Rc<Ring>) -> Self {
        TruncPoly {
            ring: Rc::clone(ring),
            c: vec![0.0; ring.len()],
        }
    }

    pub fn constant(ring: &Rc<Ring>, v: f64) -> Self {
        let mut p = TruncPoly::zero(ring);
        let zero = vec![0u8; ring.nvars()];
        p.c[ring.position(&zero).expect("constant monomial")] = v;
        p
    }

    /// Adds `v` times the monomial with exponents `exps`; dropped if truncated.
    pub fn add_term(&mut self, exps: &[u8], v: f64) {
        if let Some(i) = self.ring.position(exps) {
            self.c[i] += v;
        }
    }

    pub fn coeff(&self, exps: &[u8]) -> f64 {
        self.ring.position(exps).map_or(0.0, |i| self.c[i])
    }

    pub fn add(&self, other: &TruncPoly) -> TruncPoly {
        let c = self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect();
        TruncPoly {
            ring: Rc::clone(&self.ring),
            c,
        }
    }

    pub fn sub(&self, other: &TruncPoly) -> TruncPoly {
        let c = self.c.iter().zip(&other.c).map(|(a, b)| a - b).collect();
        TruncPoly {
            ring: Rc::clone(&self.ring),
            c,
        }
    }

    pub fn scale(&self, k: f64) -> TruncPoly {
        TruncPoly {
            ring: Rc::clone(&self.ring),
            c: self.c.iter().map(|a| k * a).collect(),
        }
    }

    pub fn mul(&self, other: &TruncPoly) -> TruncPoly {
        let mut c = vec![0.0; self.c.len()];
        for &(i, j, k) in &self.ring.table {
            let (a, b) = (self.c[i], other.c[j]);
            if a != 0.0 && b != 0.0 {
                c[k] += a * b;
            }
        }
        TruncPoly {
            ring: Rc::clone(&self.ring),
            c,
        }
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&vec![0u8; self.ring.nvars()])
    }

    /// `exp(self)` for a polynomial without constant term.
    pub fn exp_nilpotent(&self) -> TruncPoly {
        assert_eq!(self.constant_term(), 0.0, "exp needs a vanishing constant term");
        let mut out = TruncPoly::constant(&self.ring, 1.0);
        let mut power = TruncPoly::constant(&self.ring, 1.0);
        for n in 1..=self.ring.max_degree {
            power = power.mul(self).scale(1.0 / n as f64);
            out = out.add(&power);
        }
        out
    }

    /// `sum_n coeffs[n] self^n`.
    pub fn compose(&self, coeffs: &[f64]) -> TruncPoly {
        let mut out = TruncPoly::zero(&self.ring);
        let mut power = TruncPoly::constant(&self.ring, 1.0);
        for (n, a) in coeffs.iter().enumerate() {
            if n > 0 {
                power = power.mul(self);
            }
            if *a != 0.0 {
                out = out.add(&power.scale(*a));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_drops_capped_monomials() {
        // x in group 0 (cap 2), y in group 1 (cap 1).
        let r = Ring::new(vec![0, 1], vec![2, 1]);
        assert_eq!(r.len(), 6);
        let mut x = TruncPoly::zero(&r);
        x.add_term(&[1, 0], 1.0);
        x.add_term(&[0, 1], 1.0);
        let sq = x.mul(&x);
        assert_eq!(sq.coeff(&[2, 0]), 1.0);
        assert_eq!(sq.coeff(&[1, 1]), 2.0);
        assert_eq!(sq.coeff(&[0, 2]), 0.0);
        let cube = sq.mul(&x);
        assert_eq!(cube.coeff(&[2, 1]), 3.0);
    }

    #[test]
    fn exponential_matches_series() {
        let r = Ring::new(vec![0], vec![4]);
        let mut x = TruncPoly::zero(&r);
        x.add_term(&[1], 2.0);
        let e = x.exp_nilpotent();
        let want = [1.0, 2.0, 2.0, 8.0 / 6.0, 16.0 / 24.0];
        for (n, w) in want.iter().enumerate() {
            assert!((e.coeff(&[n as u8]) - w).abs() < 1e-15);
        }
    }

    #[test]
    fn compose_is_polynomial_evaluation() {
        let r = Ring::new(vec![0], vec![3]);
        let mut x = TruncPoly::zero(&r);
        x.add_term(&[1], 1.0);
        let q = x.compose(&[1.0, 0.0, 3.0]);
        assert_eq!(q.coeff(&[0]), 1.0);
        assert_eq!(q.coeff(&[2]), 3.0);
    }
}
