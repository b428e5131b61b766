//! Matrix exponentials `exp(G t)` for a fixed small complex generator `G`.

use nalgebra::{Matrix3, Schur};
use num_complex::Complex64 as C64;

/// Target accuracy of the series fallback.
const SERIES_TOL: f64 = 1e-12;
/// Above this condition number of the eigenvector matrix the eigen route is
/// abandoned.
const MAX_CONDITION: f64 = 1e6;

#[derive(Debug, Clone)]
enum Route {
    Eigen {
        v: Matrix3<C64>,
        v_inv: Matrix3<C64>,
        mu: [C64; 3],
    },
    Series,
}

/// Precomputed decomposition of a generator for repeated `exp(G t)`.
#[derive(Debug, Clone)]
pub struct Exponential {
    g: Matrix3<C64>,
    route: Route,
}

impl Exponential {
    pub fn new(g: Matrix3<C64>) -> Self {
        let route = eigen_route(&g).unwrap_or(Route::Series);
        Self { g, route }
    }

    /// Forces the scaled Taylor route.
    pub fn series(g: Matrix3<C64>) -> Self {
        Self {
            g,
            route: Route::Series,
        }
    }

    pub fn uses_eigenbasis(&self) -> bool {
        matches!(self.route, Route::Eigen { .. })
    }

    pub fn at(&self, t: f64) -> Matrix3<C64> {
        match &self.route {
            Route::Eigen { v, v_inv, mu } => {
                let mut vd = *v;
                for k in 0..3 {
                    let e = (mu[k] * t).exp();
                    for i in 0..3 {
                        vd[(i, k)] *= e;
                    }
                }
                vd * v_inv
            }
            Route::Series => expm_series(&(self.g * C64::from(t))),
        }
    }
}

fn eigen_route(g: &Matrix3<C64>) -> Option<Route> {
    let scale = g.camax().max(1e-300);
    let schur = Schur::try_new(*g, 1e-15 * scale, 500)?;
    let (q, t) = schur.unpack();

    // Eigenvectors of the upper-triangular factor by back substitution.
    let mut y = Matrix3::<C64>::zeros();
    for k in 0..3 {
        y[(k, k)] = C64::from(1.0);
        for j in (0..k).rev() {
            let mut acc = C64::from(0.0);
            for m in (j + 1)..=k {
                acc += t[(j, m)] * y[(m, k)];
            }
            let gap = t[(j, j)] - t[(k, k)];
            if gap.norm() < 1e-9 * scale {
                return None;
            }
            y[(j, k)] = -acc / gap;
        }
    }
    let mut v = q * y;
    for k in 0..3 {
        let n = v.column(k).norm();
        v.column_mut(k).unscale_mut(n);
    }
    let v_inv = v.try_inverse()?;
    if v.norm() * v_inv.norm() > MAX_CONDITION {
        return None;
    }
    let mu = [t[(0, 0)], t[(1, 1)], t[(2, 2)]];
    let mut d = v;
    for k in 0..3 {
        for i in 0..3 {
            d[(i, k)] *= mu[k];
        }
    }
    let residual = (d * v_inv - g).camax();
    if residual > 1e-13 * scale {
        return None;
    }
    Some(Route::Eigen { v, v_inv, mu })
}

/// Scaling-and-squaring Taylor exponential.
pub fn expm_series(a: &Matrix3<C64>) -> Matrix3<C64> {
    let norm = a.camax() * 3.0;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a * C64::from(0.5f64.powi(squarings));
    let mut sum = Matrix3::<C64>::identity();
    let mut term = Matrix3::<C64>::identity();
    for k in 1..60 {
        term = term * b * C64::from(1.0 / k as f64);
        sum += term;
        if term.camax() < SERIES_TOL * 1e-4 * sum.camax() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}
