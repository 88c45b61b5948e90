//! Gauss–Legendre rules and adaptive Gauss–Kronrod integration.

#![allow(clippy::excessive_precision)]

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

/// A fixed quadrature rule `Σ w_i g(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// n-point Gauss–Legendre rule on `[-1, 1]`; nodes ascending.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n == 0 {
            return domain("Gauss-Legendre rule needs at least one node");
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, refined by Newton on P_n.
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut derivative = 0.0;
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, z);
                derivative = dp;
                let step = p / dp;
                z -= step;
                if step.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, z);
            if dp.is_finite() {
                derivative = dp;
            }
            let w = 2.0 / ((1.0 - z * z) * derivative * derivative);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    /// The rule affinely mapped onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> Self {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Self {
            nodes: self.nodes.iter().map(|&t| mid + half * t).collect(),
            weights: self.weights.iter().map(|&w| half * w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Kronrod estimate and |Kronrod − Gauss| on one panel.
fn kronrod_panel(g: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = g(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = g(mid - dx) + g(mid + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

const MAX_PANELS: usize = 20_000;

/// Globally adaptive G7–K15 integration of `g` over `[a, b]`; the panel with
/// the largest error estimate is bisected until the total estimate falls
/// below `max(abs_tol, rel_tol·|value|)`.
pub fn integrate_adaptive(
    mut g: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return domain("adaptive integration needs finite limits");
    }
    if a == b {
        return Ok(Integral { value: 0.0, error_estimate: 0.0 });
    }
    let (value, error) = kronrod_panel(&mut g, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_error = error;
    while total_error > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= MAX_PANELS {
            return Err(Error::NoConvergence("adaptive Gauss-Kronrod integration"));
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = kronrod_panel(&mut g, worst.a, mid);
        let (rv, re) = kronrod_panel(&mut g, mid, worst.b);
        total += lv + rv - worst.value;
        total_error += le + re - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Panel { a: mid, b: worst.b, value: rv, error: re });
        if total_error <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
    }
    // Re-sum once to shed the drift of the running updates.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error_estimate: f64 = heap.iter().map(|p| p.error).sum();
    Ok(Integral { value, error_estimate })
}
