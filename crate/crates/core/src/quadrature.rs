//! Positive-weight quadrature on the reference line, quadrilateral, and
//! triangle: tensor Gauss-Legendre rules plus symmetric triangle rules,
//! volume and per-edge surface variants.
//!
//! Reference elements: line `[-1,1]`; quad `[-1,1]^2`; triangle with vertices
//! `(0,0), (1,0), (0,1)`. Edge-local parameters: quad edges run over `[-1,1]`,
//! triangle edges over `[0,1]`, line "edges" are the two endpoints.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Line,
    Quad,
    Tri,
}

impl Shape {
    pub fn ndim(&self) -> usize {
        match self {
            Shape::Line => 1,
            _ => 2,
        }
    }

    pub fn nedges(&self) -> usize {
        match self {
            Shape::Line => 2,
            Shape::Quad => 4,
            Shape::Tri => 3,
        }
    }

    /// Basis dimension of total/tensor degree p.
    pub fn basis_count(&self, p: usize) -> usize {
        match self {
            Shape::Line => p + 1,
            Shape::Quad => (p + 1) * (p + 1),
            Shape::Tri => (p + 1) * (p + 2) / 2,
        }
    }

    pub fn ref_volume(&self) -> f64 {
        match self {
            Shape::Line => 2.0,
            Shape::Quad => 4.0,
            Shape::Tri => 0.5,
        }
    }

    /// Corner coordinates of the reference element.
    pub fn vertices(&self) -> &'static [[f64; 2]] {
        match self {
            Shape::Line => &[[-1.0, 0.0], [1.0, 0.0]],
            Shape::Quad => &[[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]],
            Shape::Tri => &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        }
    }

    /// Vertex indices (tail, head) of edge k, counterclockwise.
    pub fn edge_vertices(&self, k: usize) -> (usize, usize) {
        match self {
            Shape::Line => [(0, 0), (1, 1)][k],
            Shape::Quad => [(0, 1), (1, 2), (2, 3), (3, 0)][k],
            Shape::Tri => [(0, 1), (1, 2), (2, 0)][k],
        }
    }

    /// Map edge-local parameter t to reference coordinates.
    pub fn edge_point(&self, k: usize, t: f64) -> [f64; 2] {
        match self {
            Shape::Line => self.vertices()[k],
            Shape::Quad => match k {
                0 => [t, -1.0],
                1 => [1.0, t],
                2 => [-t, 1.0],
                3 => [-1.0, -t],
                _ => unreachable!(),
            },
            Shape::Tri => {
                let (a, b) = self.edge_vertices(k);
                let (va, vb) = (self.vertices()[a], self.vertices()[b]);
                [va[0] + t * (vb[0] - va[0]), va[1] + t * (vb[1] - va[1])]
            }
        }
    }

    /// Measure of the edge parameter domain (2 for [-1,1], 1 for [0,1] and points).
    pub fn edge_param_measure(&self, _k: usize) -> f64 {
        match self {
            Shape::Line => 1.0,
            Shape::Quad => 2.0,
            Shape::Tri => 1.0,
        }
    }

    /// Outward unit normal of reference edge k (constant: straight edges).
    pub fn edge_normal(&self, k: usize) -> [f64; 2] {
        const S: f64 = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Shape::Line => [[-1.0, 0.0], [1.0, 0.0]][k],
            Shape::Quad => [[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]][k],
            Shape::Tri => [[0.0, -1.0], [S, S], [-1.0, 0.0]][k],
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    /// Reference coordinates; line rules store [x, 0].
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

/// A 1D rule in one edge's local parameter.
#[derive(Clone, Debug)]
pub struct EdgeRule {
    pub param: Vec<f64>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

/// One rule per reference edge.
#[derive(Clone, Debug)]
pub struct SurfaceQuadratureSet {
    pub edges: Vec<EdgeRule>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut([f64; 2]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * f(r))
            .sum()
    }
}

/// Gauss-Legendre rule with n points on [-1,1]; exact through degree 2n-1.
/// Nodes ascending, weights positive, sum 2.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > 10 {
        return Err(Error::Internal(format!(
            "gauss_legendre supports 1..=10 points, got {n}"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Standard initial guess, then Newton on P_n via the recurrence.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (pn, dpn) = legendre_with_derivative(n, x);
            let dx = pn / dpn;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dpn) = legendre_with_derivative(n, x);
        nodes[n - 1 - i] = x; // cos ordering is descending; store ascending
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dpn * dpn);
    }
    // Enforce exact symmetry about 0.
    for i in 0..n / 2 {
        let a = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[n - 1 - i] = a;
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gl_points_for_degree(order: usize) -> usize {
    order / 2 + 1
}

/// Volume rule with positive weights and exact_degree >= order.
pub fn volume_rule(shape: Shape, order: usize) -> Result<QuadratureRule> {
    match shape {
        Shape::Line => {
            let n = gl_points_for_degree(order);
            let (x, w) = gauss_legendre(n)?;
            Ok(QuadratureRule {
                points: x.iter().map(|&xi| [xi, 0.0]).collect(),
                weights: w,
                exact_degree: 2 * n - 1,
            })
        }
        Shape::Quad => {
            let n = gl_points_for_degree(order);
            let (x, w) = gauss_legendre(n)?;
            let mut points = Vec::with_capacity(n * n);
            let mut weights = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    points.push([x[i], x[j]]);
                    weights.push(w[i] * w[j]);
                }
            }
            Ok(QuadratureRule {
                points,
                weights,
                exact_degree: 2 * n - 1,
            })
        }
        Shape::Tri => triangle_rule(order),
    }
}

/// Per-edge surface rules of exact_degree >= order.
pub fn surface_rules(shape: Shape, order: usize) -> Result<SurfaceQuadratureSet> {
    let edges = match shape {
        Shape::Line => (0..2)
            .map(|_| EdgeRule {
                param: vec![0.0],
                weights: vec![1.0],
                exact_degree: order,
            })
            .collect(),
        Shape::Quad => {
            let n = gl_points_for_degree(order);
            let (x, w) = gauss_legendre(n)?;
            (0..4)
                .map(|_| EdgeRule {
                    param: x.clone(),
                    weights: w.clone(),
                    exact_degree: 2 * n - 1,
                })
                .collect()
        }
        Shape::Tri => {
            let n = gl_points_for_degree(order);
            let (x, w) = gauss_legendre(n)?;
            let param: Vec<f64> = x.iter().map(|&xi| 0.5 * (xi + 1.0)).collect();
            let weights: Vec<f64> = w.iter().map(|&wi| 0.5 * wi).collect();
            (0..3)
                .map(|_| EdgeRule {
                    param: param.clone(),
                    weights: weights.clone(),
                    exact_degree: 2 * n - 1,
                })
                .collect()
        }
    };
    Ok(SurfaceQuadratureSet { edges })
}

/// Volume/surface exactness orders used per (shape, p); the triangle volume
/// column skips the negative-weight classical rules of degree 3 and 7.
pub fn standard_orders(shape: Shape, p: usize) -> (usize, usize) {
    let surf = 2 * p + 1;
    let vol = match shape {
        Shape::Line | Shape::Quad => 2 * p + 1,
        Shape::Tri => [4, 5, 8, 9][(p - 1).min(3)],
    };
    (vol, surf)
}

// ---------------------------------------------------------------------------
// Symmetric positive-weight triangle rules.
//
// Orbit weights are barycentric fractions summing to 1 over the triangle;
// final weights are scaled by the unit-triangle area 1/2. Constants refined
// by least-squares Newton against exact monomial moments a! b! / (a+b+2)!
// (moment residuals <= 3e-17; several widely-copied tables carry only ~8
// correct digits in the degree-8 entries).
// ---------------------------------------------------------------------------

struct TriOrbits {
    degree: usize,
    centroid: Option<f64>,
    /// (weight, a): permutations of barycentric (1-2a, a, a)
    orbit3: &'static [(f64, f64)],
    /// (weight, a, b): permutations of barycentric (1-a-b, a, b)
    orbit6: &'static [(f64, f64, f64)],
}

const TRI_RULES: &[TriOrbits] = &[
    TriOrbits {
        degree: 1,
        centroid: Some(1.0),
        orbit3: &[],
        orbit6: &[],
    },
    TriOrbits {
        degree: 2,
        centroid: None,
        orbit3: &[(1.0 / 3.0, 1.0 / 6.0)],
        orbit6: &[],
    },
    TriOrbits {
        degree: 4,
        centroid: None,
        orbit3: &[
            (0.22338158967801133, 0.44594849091596478),
            (0.10995174365532200, 0.091576213509770785),
        ],
        orbit6: &[],
    },
    TriOrbits {
        degree: 5,
        centroid: Some(0.225),
        orbit3: &[
            (0.13239415278850949, 0.47014206410511372),
            (0.12593918054482667, 0.10128650732345608),
        ],
        orbit6: &[],
    },
    TriOrbits {
        degree: 6,
        centroid: None,
        orbit3: &[
            (0.11678627572635535, 0.24928674517092470),
            (0.050844906370202753, 0.063089014491499396),
        ],
        orbit6: &[(
            0.082851075618387615,
            0.31035245103377374,
            0.63650249912139933,
        )],
    },
    TriOrbits {
        degree: 8,
        centroid: Some(0.14431560767778620),
        orbit3: &[
            (0.095091634267281344, 0.45929258829272779),
            (0.10321737053472649, 0.17056930775176660),
            (0.032458497623199516, 0.050547228317032934),
        ],
        orbit6: &[(
            0.027230314174431954,
            0.26311282963462934,
            0.72849239295541723,
        )],
    },
    TriOrbits {
        degree: 9,
        centroid: Some(0.097135796290680754),
        orbit3: &[
            (0.031334700220455695, 0.48968251920244299),
            (0.077827541007629619, 0.43708959149859694),
            (0.079647738927224709, 0.18820353562082906),
            (0.025577675658501980, 0.044729513394278643),
        ],
        orbit6: &[(
            0.043283539377980539,
            0.22196298915982043,
            0.74119859878467087,
        )],
    },
];

fn triangle_rule(order: usize) -> Result<QuadratureRule> {
    let orbits = TRI_RULES
        .iter()
        .find(|r| r.degree >= order)
        .ok_or_else(|| Error::Internal(format!("no triangle rule of degree >= {order}")))?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    if let Some(w) = orbits.centroid {
        points.push([1.0 / 3.0, 1.0 / 3.0]);
        weights.push(w);
    }
    for &(w, a) in orbits.orbit3 {
        let b = 1.0 - 2.0 * a;
        // barycentric (l1,l2,l3) maps to (x,y) = (l2,l3)
        for bary in [[b, a, a], [a, b, a], [a, a, b]] {
            points.push([bary[1], bary[2]]);
            weights.push(w);
        }
    }
    for &(w, a, b) in orbits.orbit6 {
        let c = 1.0 - a - b;
        for bary in [
            [c, a, b],
            [c, b, a],
            [a, c, b],
            [a, b, c],
            [b, c, a],
            [b, a, c],
        ] {
            points.push([bary[1], bary[2]]);
            weights.push(w);
        }
    }
    for w in weights.iter_mut() {
        *w *= 0.5;
    }
    Ok(QuadratureRule {
        points,
        weights,
        exact_degree: orbits.degree,
    })
}
