use serde::{Deserialize, Serialize};

/// Limit of a bivariate density at a vertex of the simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum VertexLimit {
    Finite(f64),
    Infinite,
    Zero,
    /// The limit depends on the direction of approach.
    NonExistent,
}

const UNIT_TOL: f64 = 1e-12;

/// Vertex order used throughout: `(1,0)`, `(0,1)`, `(0,0)`, i.e. the vertex
/// where component `i` equals one.
pub(crate) const OTHERS: [(usize, usize); 3] = [(1, 2), (0, 2), (0, 1)];

/// Case analysis shared by all bivariate families: the limit at vertex `i`
/// is governed by the sum of the two other shapes. `finite` is called only
/// when both other shapes equal one.
pub(crate) fn classify(alpha: [f64; 3], mut finite: impl FnMut(usize) -> f64) -> [VertexLimit; 3] {
    let mut out = [VertexLimit::Zero; 3];
    for (i, &(j, k)) in OTHERS.iter().enumerate() {
        let s = alpha[j] + alpha[k];
        out[i] = if (s - 2.0).abs() <= UNIT_TOL {
            if (alpha[j] - 1.0).abs() <= UNIT_TOL && (alpha[k] - 1.0).abs() <= UNIT_TOL {
                VertexLimit::Finite(finite(i))
            } else {
                VertexLimit::NonExistent
            }
        } else if s < 2.0 {
            VertexLimit::Infinite
        } else {
            VertexLimit::Zero
        };
    }
    out
}

impl VertexLimit {
    pub fn finite_value(&self) -> Option<f64> {
        match self {
            VertexLimit::Finite(v) => Some(*v),
            _ => None,
        }
    }
}
