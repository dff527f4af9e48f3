//! Lattice geometry: points of `Z^2 x S^1`, finite windows, regions and the
//! finite stencil on which the Lagrangian is supported.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A point of the unit lattice (the support `M`, fiber coordinate zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub t: i64,
    pub x: i64,
}

impl Site {
    pub const fn new(t: i64, x: i64) -> Self {
        Site { t, x }
    }

    pub fn shift(self, off: StencilOffset) -> Site {
        Site::new(self.t + off.dt, self.x + off.dx)
    }

    pub fn point(self) -> LatticePoint {
        LatticePoint::new(self.t, self.x, 0.0)
    }
}

/// A point `(x^0, x^1, x^phi)` of the space `F`, with integer base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    pub t_coord: i64,
    pub x_coord: i64,
    pub phi: f64,
}

/// Maps an angle into `[-pi, pi)`.
pub fn normalize_angle(phi: f64) -> f64 {
    let mut r = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if r >= PI {
        r -= 2.0 * PI;
    }
    r
}

impl LatticePoint {
    pub fn new(t_coord: i64, x_coord: i64, phi: f64) -> Self {
        LatticePoint {
            t_coord,
            x_coord,
            phi: normalize_angle(phi),
        }
    }

    pub fn site(&self) -> Site {
        Site::new(self.t_coord, self.x_coord)
    }

    /// True for points of `M`, i.e. vanishing fiber coordinate.
    pub fn on_support(&self) -> bool {
        self.phi == 0.0
    }
}

/// Finite box `[t_min, t_max] x [x_min, x_max]` of lattice sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub t_min: i64,
    pub t_max: i64,
    pub x_min: i64,
    pub x_max: i64,
}

impl Window {
    pub fn new(t_min: i64, t_max: i64, x_min: i64, x_max: i64) -> Result<Self> {
        if t_min >= t_max || x_min >= x_max {
            return Err(Error::Range(format!(
                "empty window [{t_min},{t_max}]x[{x_min},{x_max}]"
            )));
        }
        Ok(Window {
            t_min,
            t_max,
            x_min,
            x_max,
        })
    }

    /// Symmetric window `[-ht, ht] x [-hx, hx]`.
    pub fn centered(ht: i64, hx: i64) -> Result<Self> {
        Window::new(-ht, ht, -hx, hx)
    }

    pub fn nt(&self) -> usize {
        (self.t_max - self.t_min + 1) as usize
    }

    pub fn nx(&self) -> usize {
        (self.x_max - self.x_min + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.nt() * self.nx()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, s: Site) -> bool {
        s.t >= self.t_min && s.t <= self.t_max && s.x >= self.x_min && s.x <= self.x_max
    }

    /// Row-major (time-major) storage index.
    pub fn index(&self, s: Site) -> Option<usize> {
        if self.contains(s) {
            Some(self.index_unchecked(s))
        } else {
            None
        }
    }

    #[inline]
    pub(crate) fn index_unchecked(&self, s: Site) -> usize {
        (s.t - self.t_min) as usize * self.nx() + (s.x - self.x_min) as usize
    }

    pub fn site_at(&self, idx: usize) -> Site {
        let nx = self.nx();
        Site::new(
            self.t_min + (idx / nx) as i64,
            self.x_min + (idx % nx) as i64,
        )
    }

    /// At least `margin` sites away from every edge.
    pub fn is_interior(&self, s: Site, margin: i64) -> bool {
        s.t >= self.t_min + margin
            && s.t <= self.t_max - margin
            && s.x >= self.x_min + margin
            && s.x <= self.x_max - margin
    }

    /// All sites in lexicographic `(t, x)` order.
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (self.t_min..=self.t_max)
            .flat_map(move |t| (self.x_min..=self.x_max).map(move |x| Site::new(t, x)))
    }

    pub fn times(&self) -> std::ops::RangeInclusive<i64> {
        self.t_min..=self.t_max
    }
}

/// A finite subset `Omega` of the window's lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    window: Window,
    mask: Vec<bool>,
}

impl Region {
    pub fn from_fn(window: Window, mut member: impl FnMut(Site) -> bool) -> Self {
        let mask = window.sites().map(&mut member).collect();
        Region { window, mask }
    }

    pub fn from_sites(window: Window, sites: &[Site]) -> Result<Self> {
        let mut mask = vec![false; window.len()];
        for &s in sites {
            let i = window
                .index(s)
                .ok_or_else(|| Error::Range(format!("site {s:?} outside window")))?;
            mask[i] = true;
        }
        Ok(Region { window, mask })
    }

    pub fn entire(window: Window) -> Self {
        Region::from_fn(window, |_| true)
    }

    /// Sites with `t_lo <= x^0 <= t_hi`: a compact region bounded by two slices.
    pub fn slab(window: Window, t_lo: i64, t_hi: i64) -> Result<Self> {
        if t_lo > t_hi || t_lo <= window.t_min || t_hi >= window.t_max {
            return Err(Error::Range(format!(
                "slab [{t_lo},{t_hi}] must lie strictly inside [{},{}]",
                window.t_min, window.t_max
            )));
        }
        Ok(Region::from_fn(window, |s| s.t >= t_lo && s.t <= t_hi))
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn contains(&self, s: Site) -> bool {
        self.window.index(s).is_some_and(|i| self.mask[i])
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    /// Members in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = Site> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.window.site_at(i))
    }

    pub fn complement(&self) -> Region {
        Region {
            window: self.window,
            mask: self.mask.iter().map(|m| !m).collect(),
        }
    }
}

/// The past `{x in M : x^0 <= t}` of the slice `N_t`, cut to the window.
pub fn past_region(window: &Window, t: i64) -> Result<Region> {
    if t < window.t_min || t >= window.t_max {
        return Err(Error::Range(format!(
            "slice {t} outside [{}, {})",
            window.t_min, window.t_max
        )));
    }
    Ok(Region::from_fn(*window, |s| s.t <= t))
}

/// A lattice difference `y - x` on which the Lagrangian can be nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StencilOffset {
    pub dt: i64,
    pub dx: i64,
}

impl StencilOffset {
    pub const fn new(dt: i64, dx: i64) -> Self {
        StencilOffset { dt, dx }
    }

    /// Coefficient of the `lambda_A` term.
    pub fn chi_a(&self) -> f64 {
        (self.dt == 0 && self.dx == 0) as u8 as f64
    }

    /// Coefficient of the `lambda_I` term.
    pub fn chi_i(&self) -> f64 {
        (self.dt.abs() == 1 && self.dx == 0) as u8 as f64
    }

    /// The sign function `f` of the wave stencil.
    pub fn f(&self) -> f64 {
        match (self.dt.abs(), self.dx.abs()) {
            (0, 1) => 1.0,
            (1, 0) => -1.0,
            _ => 0.0,
        }
    }

    /// Coefficient of the `delta` term.
    pub fn chi_b(&self) -> f64 {
        self.chi_a()
    }
}

/// Stencil offsets in lexicographic order.
pub const STENCIL: [StencilOffset; 5] = [
    StencilOffset::new(-1, 0),
    StencilOffset::new(0, -1),
    StencilOffset::new(0, 0),
    StencilOffset::new(0, 1),
    StencilOffset::new(1, 0),
];

/// Pairs `(x, y)` with `x` in `omega`, `y` in the window but outside `omega`,
/// and `y - x` in the stencil. Lexicographic in `(x, y)`.
pub fn stencil_pairs(omega: &Region) -> Vec<(Site, Site)> {
    let w = omega.window();
    let mut out = Vec::new();
    for x in omega.iter() {
        for off in STENCIL {
            let y = x.shift(off);
            if w.contains(y) && !omega.contains(y) {
                out.push((x, y));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn past_region_counts() {
        let w = Window::centered(2, 2).unwrap();
        let r = past_region(&w, -2).unwrap();
        assert_eq!(r.len(), 5);
        assert!(r.iter().all(|s| s.t == -2));
        assert_eq!(past_region(&w, 0).unwrap().len(), 15);
        let w = Window::new(0, 3, 0, 3).unwrap();
        assert!(matches!(past_region(&w, 5), Err(Error::Range(_))));
        assert!(past_region(&w, 3).is_err());
    }

    #[test]
    fn pairs_of_past_region_are_vertical() {
        let w = Window::centered(4, 6).unwrap();
        let pairs = stencil_pairs(&past_region(&w, 0).unwrap());
        assert_eq!(pairs.len(), w.nx());
        for (x, y) in pairs {
            assert_eq!(x.t, 0);
            assert_eq!(y, Site::new(1, x.x));
        }
    }

    #[test]
    fn pairs_of_whole_window_and_single_point() {
        let w = Window::centered(3, 3).unwrap();
        assert!(stencil_pairs(&Region::entire(w)).is_empty());
        let r = Region::from_sites(w, &[Site::new(0, 0)]).unwrap();
        let pairs = stencil_pairs(&r);
        let ys: Vec<Site> = pairs.iter().map(|p| p.1).collect();
        assert_eq!(
            ys,
            vec![
                Site::new(-1, 0),
                Site::new(0, -1),
                Site::new(0, 1),
                Site::new(1, 0)
            ]
        );
    }

    #[test]
    fn slab_has_two_boundary_layers() {
        let w = Window::centered(5, 4).unwrap();
        let pairs = stencil_pairs(&Region::slab(w, -1, 2).unwrap());
        assert_eq!(pairs.len(), 2 * w.nx());
        assert!(pairs
            .iter()
            .all(|(x, y)| (x.t == -1 && y.t == -2) || (x.t == 2 && y.t == 3)));
        assert!(Region::slab(w, -5, 0).is_err());
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_angle(PI), -PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(normalize_angle(0.0), 0.0);
        let p = LatticePoint::new(1, 2, 7.0);
        assert!(p.phi >= -PI && p.phi < PI);
    }

    #[test]
    fn stencil_coefficients() {
        let table: Vec<_> = STENCIL
            .iter()
            .map(|o| (o.chi_a(), o.chi_i(), o.f(), o.chi_b()))
            .collect();
        assert_eq!(
            table,
            vec![
                (0.0, 1.0, -1.0, 0.0),
                (0.0, 0.0, 1.0, 0.0),
                (1.0, 0.0, 0.0, 1.0),
                (0.0, 0.0, 1.0, 0.0),
                (0.0, 1.0, -1.0, 0.0),
            ]
        );
        assert_eq!(STENCIL.iter().map(|o| o.f()).sum::<f64>(), 0.0);
    }
}
