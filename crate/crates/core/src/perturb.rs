//! The perturbation hierarchy `w^(p) = S^(p) E^(p)` as jet-valued truncated
//! polynomials in `(s, t)`, the combinatorial evaluation of `I_{m,(p)}` and an
//! independent truncated-Taylor oracle for the same quantity.

use crate::error::{Error, Result};
use crate::jets::{delta_ell_field, pair_term, DualJet, Jet, PairOp};
use crate::lagrangian::{LatticeDerivs, ModelParams};
use crate::linear::{greens_apply, interior_region, linear_residual, GreensChoice, LINEAR_TOL};
use crate::series::{Ring, TruncPoly};
use crate::space::{stencil_pairs, Region, Window};

/// Largest truncation order of the hierarchy.
pub const MAX_ORDER: usize = 4;

/// Coefficients `c_{ij}` of `sum_{i+j <= P} c_{ij} s^i t^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiPoly<T> {
    degree: usize,
    coeffs: Vec<T>,
}

fn bi_index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + i
}

impl<T> BiPoly<T> {
    pub fn from_fn(degree: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut coeffs = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
        for d in 0..=degree {
            for i in 0..=d {
                coeffs.push(f(i, d - i));
            }
        }
        BiPoly { degree, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient of `s^i t^j`; `None` beyond the truncation.
    pub fn get(&self, i: usize, j: usize) -> Option<&T> {
        if i + j <= self.degree {
            Some(&self.coeffs[bi_index(i, j)])
        } else {
            None
        }
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> Option<&mut T> {
        if i + j <= self.degree {
            Some(&mut self.coeffs[bi_index(i, j)])
        } else {
            None
        }
    }

    /// `((i, j), c_ij)` by total degree, then by `i`.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &T)> {
        (0..=self.degree)
            .flat_map(|d| (0..=d).map(move |i| (i, d - i)))
            .zip(self.coeffs.iter())
    }
}

impl BiPoly<Jet> {
    /// `d_s^i d_t^j` at `s = t = 0`, i.e. `i! j! c_ij`.
    pub fn derivative(&self, i: usize, j: usize) -> Option<Jet> {
        self.get(i, j)
            .map(|c| c.scaled(factorial(i) * factorial(j)))
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Ordered compositions of `n` into `parts` positive integers.
pub fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    weak_compositions_min(n, parts, 1)
}

/// Ordered tuples of `parts` nonnegative integers summing to `n`.
pub fn weak_compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    weak_compositions_min(n, parts, 0)
}

fn weak_compositions_min(n: usize, parts: usize, min: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, parts: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if n == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if n < min * parts {
            return;
        }
        for k in min..=n - min * (parts - 1) {
            cur.push(k);
            rec(n - k, parts - 1, min, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(n, parts, min, &mut Vec::new(), &mut out);
    }
    out
}

fn multinomial(ks: &[usize]) -> f64 {
    let n: usize = ks.iter().sum();
    factorial(n) / ks.iter().map(|k| factorial(*k)).product::<f64>()
}

/// The hierarchy `w^(1), ..., w^(P)` generated by two linearized solutions.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    params: ModelParams,
    window: Window,
    order: usize,
    u: Jet,
    v: Jet,
    choices: Vec<GreensChoice>,
    w: Vec<BiPoly<Jet>>,
    e: Vec<BiPoly<DualJet>>,
}

impl Hierarchy {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn u(&self) -> &Jet {
        &self.u
    }

    pub fn v(&self) -> &Jet {
        &self.v
    }

    /// `w^(q)` for `1 <= q <= P`.
    pub fn w(&self, q: usize) -> &BiPoly<Jet> {
        &self.w[q - 1]
    }

    /// `E^(q)` for `2 <= q <= P`.
    pub fn source(&self, q: usize) -> &BiPoly<DualJet> {
        &self.e[q - 2]
    }

    /// Green's operator used at order `q >= 2`.
    pub fn choice(&self, q: usize) -> &GreensChoice {
        &self.choices[q - 2]
    }
}

/// Builds `w^(p) = S^(p) E^(p)` for `p = 2..=order` from `w^(1) = s u + t v`.
///
/// `choices` holds one Green's operator per order `2..=order`, or a single
/// entry used for all orders.
pub fn build_hierarchy(
    u: &Jet,
    v: &Jet,
    order: usize,
    choices: &[GreensChoice],
    p: &ModelParams,
    window: &Window,
) -> Result<Hierarchy> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order,
            max: MAX_ORDER,
        });
    }
    for (name, j) in [("u", u), ("v", v)] {
        if j.window() != window {
            return Err(Error::InvalidInput(format!("{name} lives on another window")));
        }
        if !j.is_test() {
            return Err(Error::InvalidInput(format!("{name} has a constant vector part")));
        }
        let r = linear_residual(j, &interior_region(window), p)?;
        if r > LINEAR_TOL {
            return Err(Error::InvalidInput(format!(
                "{name} is not a linearized solution (residual {r:e})"
            )));
        }
    }
    let choices: Vec<GreensChoice> = match choices.len() {
        1 => vec![choices[0].clone(); order.saturating_sub(1)],
        n if n + 1 >= order => choices[..order - 1].to_vec(),
        n => {
            return Err(Error::InvalidInput(format!(
                "{n} Green's operators given for order {order}"
            )))
        }
    };
    let zero = Jet::zero(*window);
    let w1 = BiPoly::from_fn(order, |i, j| match (i, j) {
        (1, 0) => u.clone(),
        (0, 1) => v.clone(),
        _ => zero.clone(),
    });
    let mut ws = vec![w1];
    let mut es = Vec::new();
    for q in 2..=order {
        let e = hierarchy_source(&ws, q, order, p, window)?;
        let choice = &choices[q - 2];
        let mut coeffs = Vec::new();
        for (_, c) in e.iter() {
            coeffs.push(greens_apply(choice, c, p, window)?);
        }
        let mut it = coeffs.into_iter();
        ws.push(BiPoly::from_fn(order, |_, _| it.next().expect("coefficient count")));
        es.push(e);
    }
    Ok(Hierarchy {
        params: *p,
        window: *window,
        order,
        u: u.clone(),
        v: v.clone(),
        choices,
        w: ws,
        e: es,
    })
}

// E^(q) = sum_{l=2}^q sum_{q_1+..+q_l=q} Delta_l[w^(q_1), ..., w^(q_l)],
// expanded coefficient by coefficient and truncated at total degree `order`.
fn hierarchy_source(
    ws: &[BiPoly<Jet>],
    q: usize,
    order: usize,
    p: &ModelParams,
    window: &Window,
) -> Result<BiPoly<DualJet>> {
    let mut e = BiPoly::from_fn(order, |_, _| DualJet::zero(*window));
    let monomials: Vec<(usize, usize)> = ws[0].iter().map(|(ij, _)| ij).collect();
    for ell in 2..=q {
        for comp in compositions(q, ell) {
            let mut pick = vec![0usize; ell];
            loop {
                let (si, ti) = pick.iter().fold((0, 0), |(a, b), &k| {
                    (a + monomials[k].0, b + monomials[k].1)
                });
                if si + ti <= order {
                    let jets: Vec<&Jet> = comp
                        .iter()
                        .zip(&pick)
                        .map(|(&qi, &k)| {
                            let (i, j) = monomials[k];
                            ws[qi - 1].get(i, j).expect("monomial in range")
                        })
                        .collect();
                    let d = delta_ell_field(ell, &jets, p)?;
                    e.get_mut(si, ti).expect("degree checked").axpy(1.0, &d);
                }
                // Odometer over coefficient choices.
                let mut k = 0;
                loop {
                    if k == ell {
                        break;
                    }
                    pick[k] += 1;
                    if pick[k] < monomials.len() {
                        break;
                    }
                    pick[k] = 0;
                    k += 1;
                }
                if k == ell {
                    break;
                }
            }
        }
    }
    Ok(e)
}

fn check_orders(hier: &Hierarchy, m: usize, p_order: usize) -> Result<()> {
    let max = hier.order();
    if m == 0 || m > max {
        return Err(Error::UnsupportedOrder { order: m, max });
    }
    if p_order > max {
        return Err(Error::UnsupportedOrder {
            order: p_order,
            max,
        });
    }
    Ok(())
}

fn check_region(hier: &Hierarchy, omega: &Region) -> Result<()> {
    if omega.window() != hier.window() {
        return Err(Error::InvalidInput("region lives on another window".into()));
    }
    Ok(())
}

/// `I_{m,(p)}^Omega` from the combinatorial sum over compositions and
/// multi-indices, with jets read off the hierarchy.
pub fn family_taylor_i(hier: &Hierarchy, omega: &Region, m: usize, p_order: usize) -> Result<f64> {
    check_orders(hier, m, p_order)?;
    check_region(hier, omega)?;
    let p = hier.params();
    let table = LatticeDerivs::new(p);
    let pairs = stencil_pairs(omega);
    let mut total = 0.0;
    for ell in 1..=p_order {
        let pref = 1.0 / factorial(ell - 1);
        for qs in compositions(p_order, ell) {
            for ks in weak_compositions(m - 1, ell) {
                let weight = pref * multinomial(&ks);
                // d_s d_t^{k_1} w^(q_1) and d_t^{k_i} w^(q_i) at s = t = 0.
                let mut jets = Vec::with_capacity(ell);
                let first = hier.w(qs[0]).derivative(1, ks[0]);
                jets.push(first.ok_or(Error::UnsupportedOrder {
                    order: 1 + ks[0],
                    max: hier.order(),
                })?);
                for i in 1..ell {
                    let d = hier.w(qs[i]).derivative(0, ks[i]);
                    jets.push(d.ok_or(Error::UnsupportedOrder {
                        order: ks[i],
                        max: hier.order(),
                    })?);
                }
                if jets.iter().any(|j| j.is_zero()) {
                    continue;
                }
                let mut factors = vec![(PairOp::Minus, &jets[0])];
                factors.extend(jets[1..].iter().map(|j| (PairOp::Plus, j)));
                let mut surface = 0.0;
                for &(x, y) in &pairs {
                    surface += pair_term(&factors, x, y, &table);
                }
                let mut volume = 0.0;
                for x in omega.iter() {
                    volume += jets.iter().map(|j| j.a.at(x)).product::<f64>();
                }
                total += weight * (surface - 0.5 * p.nu * volume);
            }
        }
    }
    Ok(total)
}

// Variable layout of the oracle ring: s1, s2, t1, t2, lambda.
const S1: usize = 0;
const S2: usize = 1;
const T1: usize = 2;
const T2: usize = 3;
const LAM: usize = 4;

struct SlotSeries {
    c: TruncPoly,
    xi: TruncPoly,
}

// c_x = sum_q lambda^q c^(q)(x)(s, t) and the fiber shift xi_x likewise, in the
// variables of one slot.
fn slot_series(
    hier: &Hierarchy,
    ring: &std::rc::Rc<Ring>,
    x: crate::space::Site,
    s_var: usize,
    t_var: usize,
    p_order: usize,
) -> SlotSeries {
    let mut c = TruncPoly::zero(ring);
    let mut xi = TruncPoly::zero(ring);
    for q in 1..=p_order {
        for ((i, j), jet) in hier.w(q).iter() {
            let mut e = [0u8; 5];
            e[s_var] = i as u8;
            e[t_var] = j as u8;
            e[LAM] = q as u8;
            let (a, u) = (jet.a.at(x), jet.u_phi.at(x));
            if a != 0.0 {
                c.add_term(&e, a);
            }
            if u != 0.0 {
                xi.add_term(&e, u);
            }
        }
    }
    SlotSeries { c, xi }
}

/// `I_{m,(p)}^Omega` by brute-force Taylor expansion of
/// `f(x) L(F(x), F(y)) f(y)` in slot-tagged variables `(s1, t1, s2, t2, lambda)`.
pub fn taylor_oracle_i(hier: &Hierarchy, omega: &Region, m: usize, p_order: usize) -> Result<f64> {
    check_orders(hier, m, p_order)?;
    check_region(hier, omega)?;
    let p = hier.params();
    let table = LatticeDerivs::new(p);
    let tdeg = (m - 1) as u32;
    let ring = Ring::new(vec![0, 0, 1, 1, 2], vec![1, tdeg, p_order as u32]);
    // The fiber shift carries at least one power of lambda.
    let max_n = p_order;
    let binom = |n: usize, k: usize| factorial(n) / (factorial(k) * factorial(n - k));
    let mut surface = 0.0;
    for (x, y) in stencil_pairs(omega) {
        let k = crate::jets::stencil_index(x, y).expect("stencil pair");
        let sx = slot_series(hier, &ring, x, S1, T1, p_order);
        let sy = slot_series(hier, &ring, y, S2, T2, p_order);
        let taylor: Vec<f64> = (0..=max_n)
            .map(|n| table.pure(k, n) / factorial(n))
            .collect();
        let lag = sx.xi.sub(&sy.xi).compose(&taylor);
        let full = sx.c.exp_nilpotent().mul(&lag).mul(&sy.c.exp_nilpotent());
        for j in 0..m {
            let w = binom(m - 1, j) * factorial(j) * factorial(m - 1 - j);
            let mut e1 = [0u8; 5];
            e1[S1] = 1;
            e1[T1] = j as u8;
            e1[T2] = (m - 1 - j) as u8;
            e1[LAM] = p_order as u8;
            let mut e2 = e1;
            e2[S1] = 0;
            e2[S2] = 1;
            surface += w * (full.coeff(&e1) - full.coeff(&e2));
        }
    }
    let mut volume = 0.0;
    for x in omega.iter() {
        let sx = slot_series(hier, &ring, x, S1, T1, p_order);
        let mut e = [0u8; 5];
        e[S1] = 1;
        e[T1] = (m - 1) as u8;
        e[LAM] = p_order as u8;
        volume += factorial(m - 1) * sx.c.exp_nilpotent().coeff(&e);
    }
    Ok(surface - 0.5 * p.nu * volume)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bipoly_layout() {
        let b = BiPoly::from_fn(3, |i, j| 10 * i + j);
        assert_eq!(b.get(2, 1), Some(&21));
        assert_eq!(b.get(2, 2), None);
        let order: Vec<(usize, usize)> = b.iter().map(|(ij, _)| ij).collect();
        assert_eq!(order.len(), 10);
        assert_eq!(order[0], (0, 0));
        assert_eq!(order[3], (0, 2));
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(4, 2), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert_eq!(compositions(3, 3), vec![vec![1, 1, 1]]);
        assert!(compositions(2, 3).is_empty());
        assert_eq!(weak_compositions(2, 2).len(), 3);
        assert_eq!(weak_compositions(0, 3), vec![vec![0, 0, 0]]);
        assert_eq!(multinomial(&[1, 1, 0]), 2.0);
    }
}
