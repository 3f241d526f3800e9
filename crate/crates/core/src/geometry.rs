//! Ground space: the unit torus (or hypercube) under a p-norm, together with
//! the distance and connection-weight distribution functions.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::voronoi::WeightedSites;

/// The p of a p-norm. Infinity is its own case so that `max` semantics are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Norm {
    P(u32),
    Infinity,
}

impl Norm {
    pub fn parse(s: &str) -> Result<Norm> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" => Ok(Norm::Infinity),
            other => {
                let p: u32 = other
                    .parse()
                    .map_err(|_| invalid("p_norm", format!("`{s}` is neither a positive integer nor `inf`")))?;
                if p == 0 {
                    return Err(invalid("p_norm", "the p-norm requires p >= 1 or p = inf"));
                }
                Ok(Norm::P(p))
            }
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Norm::P(p) => write!(f, "{p}"),
            Norm::Infinity => f.write_str("inf"),
        }
    }
}

impl From<Norm> for String {
    fn from(n: Norm) -> String {
        n.to_string()
    }
}

impl TryFrom<String> for Norm {
    type Error = Error;
    fn try_from(s: String) -> Result<Norm> {
        Norm::parse(&s)
    }
}

/// Whether coordinate differences wrap around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ground {
    #[default]
    Torus,
    Hypercube,
}

/// Dimension, norm and ground space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub dim: usize,
    pub norm: Norm,
    #[serde(default)]
    pub ground: Ground,
}

impl GeometrySpec {
    pub fn new(dim: usize, norm: Norm) -> Result<Self> {
        let g = GeometrySpec { dim, norm, ground: Ground::Torus };
        g.validate()?;
        Ok(g)
    }

    pub fn torus(dim: usize, p: u32) -> Result<Self> {
        Self::new(dim, Norm::P(p))
    }

    pub fn torus_inf(dim: usize) -> Result<Self> {
        Self::new(dim, Norm::Infinity)
    }

    pub fn with_ground(mut self, ground: Ground) -> Self {
        self.ground = ground;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(invalid("d", "dimension must be at least 1"));
        }
        if self.norm == Norm::P(0) {
            return Err(invalid("p_norm", "the p-norm requires p >= 1 or p = inf"));
        }
        Ok(())
    }

    #[inline]
    fn coord_diff(&self, a: f64, b: f64) -> f64 {
        let delta = (a - b).abs();
        match self.ground {
            Ground::Torus => delta.min(1.0 - delta),
            Ground::Hypercube => delta,
        }
    }

    /// A value that orders pairs exactly like their distance: the p-th power
    /// sum for finite p and the maximum for p = infinity. Avoids the root.
    #[inline]
    pub fn rank_key(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.norm {
            Norm::Infinity => a.iter().zip(b).map(|(&x, &y)| self.coord_diff(x, y)).fold(0.0, f64::max),
            Norm::P(1) => a.iter().zip(b).map(|(&x, &y)| self.coord_diff(x, y)).sum(),
            Norm::P(2) => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let t = self.coord_diff(x, y);
                    t * t
                })
                .sum(),
            Norm::P(p) => a.iter().zip(b).map(|(&x, &y)| self.coord_diff(x, y).powi(p as i32)).sum(),
        }
    }

    /// Inverse of [`GeometrySpec::rank_key`].
    #[inline]
    pub fn key_to_distance(&self, key: f64) -> f64 {
        match self.norm {
            Norm::Infinity | Norm::P(1) => key,
            Norm::P(2) => key.sqrt(),
            Norm::P(p) => key.powf(1.0 / p as f64),
        }
    }

    /// Maps a distance scale factor into rank-key space (`s^p`).
    #[inline]
    pub fn scale_to_key(&self, s: f64) -> f64 {
        match self.norm {
            Norm::Infinity | Norm::P(1) => s,
            Norm::P(2) => s * s,
            Norm::P(p) => s.powi(p as i32),
        }
    }

    /// Distance between raw coordinate slices; no dimension checks.
    #[inline]
    pub fn distance_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        self.key_to_distance(self.rank_key(a, b))
    }

    /// Largest possible distance in this space.
    pub fn diameter(&self) -> f64 {
        let half = match self.ground {
            Ground::Torus => 0.5,
            Ground::Hypercube => 1.0,
        };
        match self.norm {
            Norm::Infinity => half,
            Norm::P(p) => half * (self.dim as f64).powf(1.0 / p as f64),
        }
    }
}

/// A position in `[0,1)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("coords", "a point needs at least one coordinate"));
        }
        if let Some(&c) = coords.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return Err(Error::OutOfDomain {
                what: "torus coordinate",
                value: c,
                reason: "coordinates must lie in [0, 1)".into(),
            });
        }
        Ok(TorusPoint { coords })
    }

    /// Reduces arbitrary coordinates modulo 1.
    pub fn wrapped(coords: impl IntoIterator<Item = f64>) -> Self {
        let coords = coords
            .into_iter()
            .map(|c| {
                let r = c.rem_euclid(1.0);
                // rem_euclid can round up to exactly 1.0 for tiny negatives
                if r >= 1.0 {
                    0.0
                } else {
                    r
                }
            })
            .collect();
        TorusPoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

fn check_dim(g: &GeometrySpec, p: &[f64]) -> Result<()> {
    if p.len() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, got: p.len() });
    }
    Ok(())
}

/// p-norm distance of the per-coordinate circular differences.
pub fn torus_distance(a: &TorusPoint, b: &TorusPoint, g: &GeometrySpec) -> Result<f64> {
    check_dim(g, a.coords())?;
    check_dim(g, b.coords())?;
    Ok(g.distance_unchecked(a.coords(), b.coords()))
}

/// Volume of the unit ball of the p-norm in `d` dimensions,
/// `(2Γ(1/p+1))^d / Γ(d/p+1)`, or `2^d` for p = infinity.
pub fn ball_volume_constant(g: &GeometrySpec) -> f64 {
    let d = g.dim as f64;
    match g.norm {
        Norm::Infinity => 2f64.powi(g.dim as i32),
        Norm::P(p) => {
            let p = p as f64;
            (d * (2f64.ln() + ln_gamma(1.0 / p + 1.0)) - ln_gamma(d / p + 1.0)).exp()
        }
    }
}

/// CDF of the distance between two uniform points: `Π_{d,p}·x^d`, clamped to 1
/// beyond radius 0.5 where the ball no longer fits inside the torus.
pub fn dist_cdf(x: f64, g: &GeometrySpec) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::OutOfDomain { what: "dist_cdf", value: x, reason: "x must be >= 0".into() });
    }
    let v = ball_volume_constant(g) * x.powi(g.dim as i32);
    Ok(if x <= 0.5 { v } else { v.min(1.0) })
}

/// `dist(s_i, p) / ω_i` with `ω_i = w_i^{1/d}`.
pub fn weighted_distance(site: usize, p: &TorusPoint, sites: &WeightedSites, g: &GeometrySpec) -> Result<f64> {
    check_dim(g, p.coords())?;
    if sites.dim() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, got: sites.dim() });
    }
    if site >= sites.len() {
        return Err(Error::IndexOutOfRange { index: site, len: sites.len() });
    }
    Ok(g.distance_unchecked(sites.position(site), p.coords()) / sites.omega(site))
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid("T", "connection weights need T > 0; T = 0 is the threshold model"));
    }
    Ok(())
}

/// Natural log of the connection weight, `(ln w_v - d ln dist) / T`.
pub fn ln_connection_weight(weight: f64, distance: f64, t: f64, dim: usize) -> f64 {
    (weight.ln() - dim as f64 * distance.ln()) / t
}

/// Connection weight `X(c,v) = (w_v / dist(c,v)^d)^{1/T}`.
pub fn connection_weight(c_pos: &TorusPoint, v: usize, sites: &WeightedSites, t: f64, g: &GeometrySpec) -> Result<f64> {
    check_temperature(t)?;
    check_dim(g, c_pos.coords())?;
    if v >= sites.len() {
        return Err(Error::IndexOutOfRange { index: v, len: sites.len() });
    }
    let dist = g.distance_unchecked(c_pos.coords(), sites.position(v));
    if dist == 0.0 {
        return Err(Error::CoincidentPoints { what: format!("clause and variable {v}") });
    }
    Ok(ln_connection_weight(sites.weight(v), dist, t, g.dim).exp())
}

/// CDF of the connection weight for a uniform clause position,
/// `1 - Π_{d,p}·w_v·x^{-T}`, valid for `x >= (2^d w_v)^{1/T}`.
pub fn connection_weight_cdf(x: f64, w_v: f64, t: f64, g: &GeometrySpec) -> Result<f64> {
    check_temperature(t)?;
    if !(w_v > 0.0) {
        return Err(invalid("w_v", "weights must be positive"));
    }
    let threshold = (2f64.powi(g.dim as i32) * w_v).powf(1.0 / t);
    // relative slack so that the threshold itself (computed either way) is accepted
    if !(x >= threshold * (1.0 - 1e-12)) {
        return Err(Error::OutOfDomain {
            what: "connection_weight_cdf",
            value: x,
            reason: format!("formula holds only for x >= (2^d w_v)^(1/T) = {threshold}"),
        });
    }
    Ok(1.0 - ball_volume_constant(g) * w_v * x.powf(-t))
}

#[cfg(test)]
mod tests {
    use super::*;

    macro_rules! assert_close {
        ($a:expr, $b:expr, $tol:expr) => {{
            let (a, b): (f64, f64) = ($a, $b);
            assert!((a - b).abs() <= $tol, "{a} vs {b} (tol {})", $tol);
        }};
    }

    fn pt(c: &[f64]) -> TorusPoint {
        TorusPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let g1 = GeometrySpec::torus(1, 2).unwrap();
        assert_close!(torus_distance(&pt(&[0.1]), &pt(&[0.9]), &g1).unwrap(), 0.2, 1e-12);
        let ginf = GeometrySpec::torus_inf(2).unwrap();
        assert_close!(torus_distance(&pt(&[0.0, 0.0]), &pt(&[0.3, 0.4]), &ginf).unwrap(), 0.4, 1e-12);
        let g3 = GeometrySpec::torus(3, 1).unwrap();
        let a = pt(&[0.2, 0.7, 0.4]);
        assert_eq!(torus_distance(&a, &a, &g3).unwrap(), 0.0);
    }

    #[test]
    fn distance_rejects_dimension_mismatch() {
        let g = GeometrySpec::torus(2, 2).unwrap();
        let err = torus_distance(&pt(&[0.1]), &pt(&[0.1, 0.2]), &g).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn distance_is_bounded_by_diameter() {
        let g = GeometrySpec::torus(3, 2).unwrap();
        let d = torus_distance(&pt(&[0.0, 0.0, 0.0]), &pt(&[0.5, 0.5, 0.5]), &g).unwrap();
        assert_close!(d, g.diameter(), 1e-12);
        assert_close!(d, (3.0 * 0.25f64).sqrt(), 1e-12);
    }

    #[test]
    fn ball_volume_examples() {
        assert_close!(ball_volume_constant(&GeometrySpec::torus(2, 2).unwrap()), std::f64::consts::PI, 1e-12);
        for d in 1..=5 {
            let g = GeometrySpec::torus_inf(d).unwrap();
            assert_eq!(ball_volume_constant(&g), 2f64.powi(d as i32));
        }
        for p in [1, 2, 3, 7, 50] {
            let g = GeometrySpec::torus(1, p).unwrap();
            assert_close!(ball_volume_constant(&g), 2.0, 1e-12);
        }
        // cross-polytope and 3-ball
        assert_close!(ball_volume_constant(&GeometrySpec::torus(2, 1).unwrap()), 2.0, 1e-12);
        assert_close!(
            ball_volume_constant(&GeometrySpec::torus(3, 2).unwrap()),
            4.0 / 3.0 * std::f64::consts::PI,
            1e-12
        );
    }

    #[test]
    fn ball_volume_approaches_cube() {
        let v = ball_volume_constant(&GeometrySpec::torus(2, 64).unwrap());
        assert!((v - 4.0).abs() / 4.0 < 0.02, "{v}");
    }

    #[test]
    fn dist_cdf_examples() {
        let g1 = GeometrySpec::torus(1, 2).unwrap();
        assert_eq!(dist_cdf(0.0, &g1).unwrap(), 0.0);
        assert_close!(dist_cdf(0.25, &g1).unwrap(), 0.5, 1e-12);
        let g2 = GeometrySpec::torus(2, 2).unwrap();
        assert_close!(dist_cdf(0.1, &g2).unwrap(), 0.031_415_926_5, 1e-9);
        assert_eq!(dist_cdf(0.7, &g2).unwrap(), 1.0);
        assert!(dist_cdf(-0.1, &g2).is_err());
    }

    #[test]
    fn weighted_distance_examples() {
        let g1 = GeometrySpec::torus(1, 2).unwrap();
        let sites = WeightedSites::new(vec![pt(&[0.0]), pt(&[0.3])], vec![1.0, 4.0], 1).unwrap();
        let p = pt(&[0.1]);
        assert_close!(weighted_distance(0, &p, &sites, &g1).unwrap(), 0.1, 1e-12);
        assert_close!(weighted_distance(1, &p, &sites, &g1).unwrap(), 0.05, 1e-12);
        assert!(matches!(weighted_distance(2, &p, &sites, &g1), Err(Error::IndexOutOfRange { .. })));

        let g2 = GeometrySpec::torus(2, 2).unwrap();
        let sites = WeightedSites::new(vec![pt(&[0.5, 0.5]), pt(&[0.0, 0.0])], vec![1.0, 4.0], 2).unwrap();
        assert_close!(weighted_distance(1, &pt(&[0.2, 0.0]), &sites, &g2).unwrap(), 0.1, 1e-12);
    }

    #[test]
    fn connection_weight_examples() {
        let g1 = GeometrySpec::torus(1, 2).unwrap();
        let sites = WeightedSites::new(vec![pt(&[0.0])], vec![1.0], 1).unwrap();
        assert_close!(connection_weight(&pt(&[0.5]), 0, &sites, 0.5, &g1).unwrap(), 4.0, 1e-12);
        let heavy = WeightedSites::new(vec![pt(&[0.5]), pt(&[0.0])], vec![1.0, 4.0], 1).unwrap();
        for t in [0.5, 1.0, 2.0] {
            assert_close!(connection_weight(&pt(&[0.25]), 1, &heavy, t, &g1).unwrap(), 16f64.powf(1.0 / t), 1e-12);
        }
        let g2 = GeometrySpec::torus(2, 2).unwrap();
        let s2 = WeightedSites::new(vec![pt(&[0.0, 0.0])], vec![1.0], 2).unwrap();
        assert_close!(connection_weight(&pt(&[0.5, 0.0]), 0, &s2, 0.5, &g2).unwrap(), 16.0, 1e-12);

        assert!(connection_weight(&pt(&[0.5]), 0, &sites, 0.0, &g1).is_err());
        assert!(matches!(connection_weight(&pt(&[0.0]), 0, &sites, 0.5, &g1), Err(Error::CoincidentPoints { .. })));
    }

    #[test]
    fn connection_weight_cdf_examples() {
        let g1 = GeometrySpec::torus(1, 2).unwrap();
        assert_close!(connection_weight_cdf(16.0, 1.0, 0.5, &g1).unwrap(), 0.5, 1e-12);
        // Π_{1,p} = 2 = 2^1, so the zero of the CDF coincides with the threshold
        assert_close!(connection_weight_cdf(4.0, 1.0, 0.5, &g1).unwrap(), 0.0, 1e-12);
        assert!(connection_weight_cdf(1e300, 1.0, 0.5, &g1).unwrap() > 1.0 - 1e-12);
        assert!(connection_weight_cdf(3.9, 1.0, 0.5, &g1).is_err());
        assert!(connection_weight_cdf(16.0, 1.0, 0.0, &g1).is_err());
    }

    #[test]
    fn norm_parsing() {
        assert_eq!(Norm::parse("inf").unwrap(), Norm::Infinity);
        assert_eq!(Norm::parse("3").unwrap(), Norm::P(3));
        assert!(Norm::parse("0").is_err());
        assert!(Norm::parse("-1").is_err());
    }

    #[test]
    fn wrapped_points_stay_in_range() {
        let p = TorusPoint::wrapped([-1e-18, 1.25, -0.25]);
        assert!(p.coords().iter().all(|c| (0.0..1.0).contains(c)));
        assert_eq!(p.coords()[1], 0.25);
        assert_eq!(p.coords()[2], 0.75);
    }
}
