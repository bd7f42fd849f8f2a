//! Achievable rate pairs as polygons, and containment between two regions.

use serde::{Deserialize, Serialize};

use crate::coding::params::log_inv;

/// `a1 R1 + a2 R2 <= b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub name: String,
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
}

impl HalfPlane {
    fn new(name: &str, a1: f64, a2: f64, b: f64) -> Self {
        Self { name: name.into(), a1, a2, b }
    }

    fn value(&self, p: (f64, f64)) -> f64 {
        self.a1 * p.0 + self.a2 * p.1 - self.b
    }
}

/// A polygon of nonnegative rate pairs cut out by half-planes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    pub name: String,
    pub constraints: Vec<HalfPlane>,
    /// Vertices in counter-clockwise order; empty when the region is.
    pub polygon: Vec<(f64, f64)>,
    pub empty: bool,
}

impl RateRegion {
    pub fn from_constraints(name: &str, constraints: Vec<HalfPlane>) -> Self {
        // Start from a box covering every intercept, then clip.
        let span = constraints.iter().map(|c| c.b.abs()).fold(1.0, f64::max) * 4.0 + 1.0;
        let mut poly = vec![(0.0, 0.0), (span, 0.0), (span, span), (0.0, span)];
        for c in &constraints {
            poly = clip(&poly, c);
            if poly.is_empty() {
                break;
            }
        }
        let polygon = dedup(poly);
        Self { name: name.into(), constraints, empty: polygon.is_empty(), polygon }
    }

    pub fn contains(&self, p: (f64, f64), tol: f64) -> bool {
        !self.empty && p.0 >= -tol && p.1 >= -tol && self.constraints.iter().all(|c| c.value(p) <= tol)
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.polygon)
    }
}

fn shoelace(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

fn dedup(poly: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(poly.len());
    for p in poly {
        if out.last().is_none_or(|q: &(f64, f64)| (q.0 - p.0).abs() > 1e-12 || (q.1 - p.1).abs() > 1e-12) {
            out.push(p);
        }
    }
    if out.len() > 1 {
        let (f, l) = (out[0], out[out.len() - 1]);
        if (f.0 - l.0).abs() <= 1e-12 && (f.1 - l.1).abs() <= 1e-12 {
            out.pop();
        }
    }
    out
}

/// Sutherland-Hodgman against one half-plane.
fn clip(poly: &[(f64, f64)], c: &HalfPlane) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let n = poly.len();
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let (vp, vq) = (c.value(p), c.value(q));
        if vp <= 0.0 {
            out.push(p);
        }
        if (vp < 0.0 && vq > 0.0) || (vp > 0.0 && vq < 0.0) {
            let t = vp / (vp - vq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

/// Region of the band-structured scheme: the three rate inequalities with their penalties.
pub fn marton_region(i0_b: f64, i0_c: f64, i_inf: f64, eps_tilde: f64) -> RateRegion {
    let l = log_inv(eps_tilde);
    RateRegion::from_constraints(
        "marton",
        vec![
            HalfPlane::new("R1 <= I0B - 5 log(1/eps~) - 2", 1.0, 0.0, i0_b - 5.0 * l - 2.0),
            HalfPlane::new("R2 <= I0C - 5 log(1/eps~) - 2", 0.0, 1.0, i0_c - 5.0 * l - 2.0),
            HalfPlane::new("R1 + R2 <= I0B + I0C - I_inf - 11 log(1/eps~) - 5", 1.0, 1.0, i0_b + i0_c - i_inf - 11.0 * l - 5.0),
        ],
    )
}

/// Rate part of the scheme's region with every penalty dropped.
pub fn marton_rate_part(i0_b: f64, i0_c: f64, i_inf: f64) -> RateRegion {
    RateRegion::from_constraints(
        "marton-rate-part",
        vec![
            HalfPlane::new("R1 <= I0B", 1.0, 0.0, i0_b),
            HalfPlane::new("R2 <= I0C", 0.0, 1.0, i0_c),
            HalfPlane::new("R1 + R2 <= I0B + I0C - I_inf", 1.0, 1.0, i0_b + i0_c - i_inf),
        ],
    )
}

/// Rates of the earlier binning-based bound, with the error budget it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinningRegion {
    pub region: RateRegion,
    /// `2 eps0 + eps_inf + 2 gamma + exp(-1/gamma)`.
    pub error_budget: f64,
}

/// Uses natural-log penalties `ln(1/gamma)` as stated for that bound.
pub fn binning_region(i0_b: f64, i0_c: f64, i_inf: f64, eps0: f64, eps_inf: f64, gamma: f64) -> BinningRegion {
    let pen = (1.0 / gamma).ln();
    BinningRegion {
        region: RateRegion::from_constraints(
            "binning",
            vec![
                HalfPlane::new("R1 <= I0B - ln(1/gamma)", 1.0, 0.0, i0_b - pen),
                HalfPlane::new("R2 <= I0C - I_inf - 2 ln(1/gamma)", 0.0, 1.0, i0_c - i_inf - 2.0 * pen),
            ],
        ),
        error_budget: 2.0 * eps0 + eps_inf + 2.0 * gamma + (-1.0 / gamma).exp(),
    }
}

pub fn binning_rate_part(i0_b: f64, i0_c: f64, i_inf: f64) -> RateRegion {
    RateRegion::from_constraints(
        "binning-rate-part",
        vec![HalfPlane::new("R1 <= I0B", 1.0, 0.0, i0_b), HalfPlane::new("R2 <= I0C - I_inf", 0.0, 1.0, i0_c - i_inf)],
    )
}

/// Whether every vertex of `inner` lies in `outer` (both convex).
pub fn region_contains(outer: &RateRegion, inner: &RateRegion, tol: f64) -> bool {
    inner.empty || inner.polygon.iter().all(|&p| outer.contains(p, tol))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionComparison {
    pub marton: RateRegion,
    pub binning: BinningRegion,
    pub marton_rate_part: RateRegion,
    pub binning_rate_part: RateRegion,
    /// Rate parts: the scheme's region contains the earlier one.
    pub contains: bool,
    /// ... and is strictly larger (positive area difference).
    pub strictly_larger: bool,
}

pub fn compare_regions(i0_b: f64, i0_c: f64, i_inf: f64, eps_tilde: f64, eps0: f64, eps_inf: f64, gamma: f64) -> RegionComparison {
    let mr = marton_rate_part(i0_b, i0_c, i_inf);
    let vr = binning_rate_part(i0_b, i0_c, i_inf);
    let contains = region_contains(&mr, &vr, 1e-9);
    let strictly_larger = contains && mr.area() > vr.area() + 1e-9;
    RegionComparison {
        marton: marton_region(i0_b, i0_c, i_inf, eps_tilde),
        binning: binning_region(i0_b, i0_c, i_inf, eps0, eps_inf, gamma),
        marton_rate_part: mr,
        binning_rate_part: vr,
        contains,
        strictly_larger,
    }
}
