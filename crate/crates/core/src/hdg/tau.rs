use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{FaceClass, MeshHierarchy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauPolicy {
    Uniform,
    SingleFace,
    SkeletonAdjacentSingleFace,
}

impl TauPolicy {
    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::SingleFace => "single_face",
            Self::SkeletonAdjacentSingleFace => "skeleton_adjacent_single_face",
        }
    }
}

/// Stabilization value on every (element, local face) of the mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauAssignment {
    pub policy: TauPolicy,
    pub value: f64,
    /// `table[subdomain][element][local face]`.
    pub table: Vec<Vec<[f64; 3]>>,
}

impl TauAssignment {
    pub fn get(&self, subdomain: usize, element: usize) -> [f64; 3] {
        self.table[subdomain][element]
    }
}

pub fn assign_tau(mesh: &MeshHierarchy, policy: TauPolicy, value: f64) -> Result<TauAssignment> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {value}")));
    }
    let mut table = Vec::with_capacity(mesh.subdomains.len());
    for sub in &mesh.subdomains {
        let mut rows = Vec::with_capacity(sub.elements.len());
        for (e, el) in sub.elements.iter().enumerate() {
            let smallest = (0..3).min_by_key(|&j| el.faces[j]).unwrap();
            let positive = match policy {
                TauPolicy::Uniform => {
                    rows.push([value; 3]);
                    continue;
                }
                TauPolicy::SingleFace => smallest,
                TauPolicy::SkeletonAdjacentSingleFace => {
                    let class = |j: usize| sub.faces[el.faces[j]].class;
                    let skeleton: Vec<usize> = (0..3)
                        .filter(|&j| matches!(class(j), FaceClass::SkeletonOwned(_)))
                        .collect();
                    if skeleton.len() > 1 {
                        return Err(Error::TauPolicy {
                            policy: policy.name(),
                            subdomain: sub.id,
                            element: e,
                            count: skeleton.len(),
                        });
                    }
                    skeleton
                        .first()
                        .copied()
                        .or_else(|| {
                            (0..3)
                                .filter(|&j| class(j) == FaceClass::Boundary)
                                .min_by_key(|&j| el.faces[j])
                        })
                        .unwrap_or(smallest)
                }
            };
            let mut t = [0.0; 3];
            t[positive] = value;
            rows.push(t);
        }
        table.push(rows);
    }
    Ok(TauAssignment { policy, value, table })
}
