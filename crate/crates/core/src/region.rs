//! Regions of the punctured space `ℝ^d \ {0}`.
//!
//! A region is a finite union of boxes, annuli and explicit atom sets, with
//! caller-declared open/closed faces. Membership never includes the origin.
//! Closures and boundaries are computed symbolically so that boundary sets
//! like `∂A` can be fed back into capacity computations.

use serde::{Deserialize, Serialize};

use crate::linalg::norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    /// All of `ℝ^d_0`.
    Whole,
    Empty,
    /// Product of intervals; the same open/closed convention on every axis.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default)]
        lo_closed: bool,
        #[serde(default)]
        hi_closed: bool,
    },
    /// `{z : inner < |z| < outer}` with the declared endpoint conventions.
    Annulus {
        inner: f64,
        outer: f64,
        #[serde(default)]
        inner_closed: bool,
        #[serde(default)]
        outer_closed: bool,
    },
    Points { points: Vec<Vec<f64>> },
    Union { parts: Vec<Region> },
    Difference {
        base: Box<Region>,
        removed: Box<Region>,
    },
}

fn within(x: f64, lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> bool {
    let above = if lo_closed { x >= lo } else { x > lo };
    let below = if hi_closed { x <= hi } else { x < hi };
    above && below
}

impl Region {
    /// `(a, b)`
    pub fn open(a: f64, b: f64) -> Self {
        Region::Box {
            lo: vec![a],
            hi: vec![b],
            lo_closed: false,
            hi_closed: false,
        }
    }

    /// `[a, b]`
    pub fn closed(a: f64, b: f64) -> Self {
        Region::Box {
            lo: vec![a],
            hi: vec![b],
            lo_closed: true,
            hi_closed: true,
        }
    }

    /// `(a, b]`
    pub fn left_open(a: f64, b: f64) -> Self {
        Region::Box {
            lo: vec![a],
            hi: vec![b],
            lo_closed: false,
            hi_closed: true,
        }
    }

    /// `[a, b)`
    pub fn right_open(a: f64, b: f64) -> Self {
        Region::Box {
            lo: vec![a],
            hi: vec![b],
            lo_closed: true,
            hi_closed: false,
        }
    }

    pub fn point(x: f64) -> Self {
        Region::Points {
            points: vec![vec![x]],
        }
    }

    pub fn points(xs: &[f64]) -> Self {
        Region::Points {
            points: xs.iter().map(|&x| vec![x]).collect(),
        }
    }

    pub fn closed_annulus(inner: f64, outer: f64) -> Self {
        Region::Annulus {
            inner,
            outer,
            inner_closed: true,
            outer_closed: true,
        }
    }

    pub fn union(parts: Vec<Region>) -> Self {
        Region::Union { parts }
    }

    pub fn minus(self, removed: Region) -> Self {
        Region::Difference {
            base: Box::new(self),
            removed: Box::new(removed),
        }
    }

    /// Membership test. The origin never belongs to a region.
    pub fn contains(&self, z: &[f64]) -> bool {
        if z.iter().all(|&x| x == 0.0) {
            return false;
        }
        self.contains_raw(z)
    }

    fn contains_raw(&self, z: &[f64]) -> bool {
        match self {
            Region::Whole => true,
            Region::Empty => false,
            Region::Box {
                lo,
                hi,
                lo_closed,
                hi_closed,
            } => {
                lo.len() == z.len()
                    && hi.len() == z.len()
                    && z.iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(&x, (&a, &b))| within(x, a, b, *lo_closed, *hi_closed))
            }
            Region::Annulus {
                inner,
                outer,
                inner_closed,
                outer_closed,
            } => within(norm(z), *inner, *outer, *inner_closed, *outer_closed),
            Region::Points { points } => points.iter().any(|p| p.as_slice() == z),
            Region::Union { parts } => parts.iter().any(|p| p.contains_raw(z)),
            Region::Difference { base, removed } => {
                base.contains_raw(z) && !removed.contains_raw(z)
            }
        }
    }

    /// Closure in `ℝ^d_0`. Exact for boxes, annuli, points and unions; for
    /// differences it returns `cl(base) \ int(removed)`, a superset.
    pub fn closure(&self) -> Region {
        match self {
            Region::Whole | Region::Empty | Region::Points { .. } => self.clone(),
            Region::Box { lo, hi, .. } => Region::Box {
                lo: lo.clone(),
                hi: hi.clone(),
                lo_closed: true,
                hi_closed: true,
            },
            Region::Annulus { inner, outer, .. } => Region::Annulus {
                inner: *inner,
                outer: *outer,
                inner_closed: true,
                outer_closed: true,
            },
            Region::Union { parts } => Region::Union {
                parts: parts.iter().map(Region::closure).collect(),
            },
            Region::Difference { base, removed } => Region::Difference {
                base: Box::new(base.closure()),
                removed: Box::new(removed.interior()),
            },
        }
    }

    /// Interior. Exact for boxes, annuli and points; for unions it returns
    /// the union of interiors, a subset.
    pub fn interior(&self) -> Region {
        match self {
            Region::Whole | Region::Empty => self.clone(),
            Region::Points { .. } => Region::Empty,
            Region::Box { lo, hi, .. } => Region::Box {
                lo: lo.clone(),
                hi: hi.clone(),
                lo_closed: false,
                hi_closed: false,
            },
            Region::Annulus { inner, outer, .. } => Region::Annulus {
                inner: *inner,
                outer: *outer,
                inner_closed: false,
                outer_closed: false,
            },
            Region::Union { parts } => Region::Union {
                parts: parts.iter().map(Region::interior).collect(),
            },
            Region::Difference { base, removed } => Region::Difference {
                base: Box::new(base.interior()),
                removed: Box::new(removed.closure()),
            },
        }
    }

    /// Boundary in `ℝ^d_0`. Exact for boxes, annuli and points; a superset
    /// for unions and differences.
    pub fn boundary(&self) -> Region {
        match self {
            Region::Whole | Region::Empty => Region::Empty,
            Region::Points { .. } => self.clone(),
            Region::Box { lo, hi, .. } if lo.len() == 1 && hi.len() == 1 => {
                let pts: Vec<Vec<f64>> = [lo[0], hi[0]]
                    .iter()
                    .filter(|x| x.is_finite() && **x != 0.0)
                    .map(|&x| vec![x])
                    .collect();
                if pts.is_empty() {
                    Region::Empty
                } else {
                    Region::Points { points: pts }
                }
            }
            Region::Box { .. } | Region::Annulus { .. } => {
                Region::Difference {
                    base: Box::new(self.closure()),
                    removed: Box::new(self.interior()),
                }
            }
            Region::Union { parts } => Region::Union {
                parts: parts.iter().map(Region::boundary).collect(),
            },
            Region::Difference { base, removed } => Region::Union {
                parts: vec![base.boundary(), removed.boundary()],
            },
        }
    }

    /// Whether the origin lies in the closure (taken in `ℝ^d`).
    pub fn closure_contains_origin(&self) -> bool {
        match self {
            Region::Whole => true,
            Region::Empty | Region::Points { .. } => false,
            Region::Box { lo, hi, .. } => lo.iter().zip(hi).all(|(&a, &b)| a <= 0.0 && 0.0 <= b),
            Region::Annulus { inner, outer, .. } => *inner <= 0.0 && *outer >= 0.0,
            Region::Union { parts } => parts.iter().any(Region::closure_contains_origin),
            Region::Difference { base, .. } => base.closure_contains_origin(),
        }
    }

    pub fn is_empty_syntactically(&self) -> bool {
        match self {
            Region::Empty => true,
            Region::Points { points } => points.is_empty(),
            Region::Union { parts } => parts.iter().all(Region::is_empty_syntactically),
            _ => false,
        }
    }

    /// Disjointness test. Box/box, point/anything and unions are decided
    /// exactly; other combinations fall back to checking the probe points
    /// (typically the atoms of the measures under study).
    pub fn is_disjoint(&self, other: &Region, probes: &[Vec<f64>]) -> bool {
        match (self, other) {
            (Region::Empty, _) | (_, Region::Empty) => true,
            (Region::Points { points }, r) | (r, Region::Points { points }) => {
                points.iter().all(|p| !r.contains(p))
            }
            (Region::Union { parts }, r) | (r, Region::Union { parts }) => {
                parts.iter().all(|p| p.is_disjoint(r, probes))
            }
            (
                Region::Box {
                    lo: l1,
                    hi: h1,
                    lo_closed: lc1,
                    hi_closed: hc1,
                },
                Region::Box {
                    lo: l2,
                    hi: h2,
                    lo_closed: lc2,
                    hi_closed: hc2,
                },
            ) if l1.len() == l2.len() => (0..l1.len()).any(|k| {
                // the intersection of two intervals is [max lo, min hi]
                let (lo, lo_closed) = if l1[k] > l2[k] {
                    (l1[k], *lc1)
                } else if l2[k] > l1[k] {
                    (l2[k], *lc2)
                } else {
                    (l1[k], *lc1 && *lc2)
                };
                let (hi, hi_closed) = if h1[k] < h2[k] {
                    (h1[k], *hc1)
                } else if h2[k] < h1[k] {
                    (h2[k], *hc2)
                } else {
                    (h1[k], *hc1 && *hc2)
                };
                lo > hi || (lo == hi && !(lo_closed && hi_closed))
            }),
            _ => probes.iter().all(|p| !(self.contains(p) && other.contains(p))),
        }
    }
}
