//! Euler-Lagrange dynamics in the Uicker/Kahn form.
//!
//! `U_ij = ∂T_i/∂q_j` and `U_ijk = ∂²T_i/∂q_j∂q_k` are built from the
//! revolute generator `Q`. Writing `D_j = T_{j−1} Q T_{j−1}⁻¹` gives
//! `U_ij = D_j T_i` for `j ≤ i` and `U_ijk = D_a D_b T_i` with
//! `a = min(j, k)`, `b = max(j, k) ≤ i`. Link and joint indices in the public
//! functions are 1-based, matching `T_i` = pose of link frame `i`.

use nalgebra::{DMatrix, DVector, Matrix4, RowVector4, Vector3};

use crate::error::{check_len, Error, Result};
use crate::kinematics::frame_transforms;
use crate::model::{LinkInertia, RobotModel};

pub const STANDARD_GRAVITY: f64 = 9.81;

/// Revolute joint generator: `d/dθ Rot_z(θ) = Q·Rot_z(θ)`.
pub fn q_matrix() -> Matrix4<f64> {
    let mut q = Matrix4::zeros();
    q[(0, 1)] = -1.0;
    q[(1, 0)] = 1.0;
    q
}

/// 4×4 pseudo-inertia `J = ∫ r̃ r̃ᵀ dm` with `r̃ = (x, y, z, 1)` in the link frame.
pub fn pseudo_inertia(link: &LinkInertia) -> Matrix4<f64> {
    let i = &link.inertia;
    let second_moment = nalgebra::Matrix3::identity() * (0.5 * i.trace()) - i;
    let first_moment = link.com * link.mass;
    let mut j = Matrix4::zeros();
    j.fixed_view_mut::<3, 3>(0, 0).copy_from(&second_moment);
    j.fixed_view_mut::<3, 1>(0, 3).copy_from(&first_moment);
    j.fixed_view_mut::<1, 3>(3, 0)
        .copy_from(&first_moment.transpose());
    j[(3, 3)] = link.mass;
    j
}

/// `Tr(A J Bᵀ)` without forming the product with `Bᵀ`.
fn trace_ajbt(a: &Matrix4<f64>, j: &Matrix4<f64>, b: &Matrix4<f64>) -> f64 {
    (a * j).component_mul(b).sum()
}

fn ensure_revolute(model: &RobotModel) -> Result<()> {
    if model.all_revolute() {
        Ok(())
    } else {
        Err(Error::UnsupportedModel(
            "dynamics supports revolute joints only".into(),
        ))
    }
}

/// Link transforms `T_0 = I, T_1, …, T_n` and the factors `D_1 … D_n` at one `q`.
#[derive(Debug, Clone)]
pub struct UMatrices {
    t: Vec<Matrix4<f64>>,
    d: Vec<Matrix4<f64>>,
}

impl UMatrices {
    pub fn new(model: &RobotModel, q: &[f64]) -> Result<Self> {
        let frames = frame_transforms(model, q)?;
        let t: Vec<Matrix4<f64>> = frames.iter().map(|f| f.to_homogeneous()).collect();
        let qm = q_matrix();
        let d = frames[..frames.len() - 1]
            .iter()
            .map(|f| f.to_homogeneous() * qm * f.inverse().to_homogeneous())
            .collect();
        Ok(Self { t, d })
    }

    pub fn dof(&self) -> usize {
        self.d.len()
    }

    fn check(&self, what: &'static str, index: usize) -> Result<()> {
        if index == 0 || index > self.dof() {
            return Err(Error::IndexOutOfRange {
                what,
                index,
                max: self.dof(),
            });
        }
        Ok(())
    }

    /// `T_i` (1-based; `i = 0` is the base).
    pub fn t(&self, i: usize) -> &Matrix4<f64> {
        &self.t[i]
    }

    /// `U_ij` for validated 1-based indices.
    fn u(&self, i: usize, j: usize) -> Matrix4<f64> {
        if j > i {
            Matrix4::zeros()
        } else {
            self.d[j - 1] * self.t[i]
        }
    }

    fn u2(&self, i: usize, j: usize, k: usize) -> Matrix4<f64> {
        let (a, b) = (j.min(k), j.max(k));
        if b > i {
            Matrix4::zeros()
        } else {
            self.d[a - 1] * self.d[b - 1] * self.t[i]
        }
    }

    pub fn u_ij(&self, i: usize, j: usize) -> Result<Matrix4<f64>> {
        self.check("link", i)?;
        self.check("joint", j)?;
        Ok(self.u(i, j))
    }

    pub fn u_ijk(&self, i: usize, j: usize, k: usize) -> Result<Matrix4<f64>> {
        self.check("link", i)?;
        self.check("joint", j)?;
        self.check("joint", k)?;
        Ok(self.u2(i, j, k))
    }
}

/// `∂T_i/∂q_j` (1-based indices).
pub fn u_ij(model: &RobotModel, q: &[f64], i: usize, j: usize) -> Result<Matrix4<f64>> {
    UMatrices::new(model, q)?.u_ij(i, j)
}

/// `∂²T_i/∂q_j∂q_k` (1-based indices).
pub fn u_ijk(model: &RobotModel, q: &[f64], i: usize, j: usize, k: usize) -> Result<Matrix4<f64>> {
    UMatrices::new(model, q)?.u_ijk(i, j, k)
}

/// Mass matrix, velocity-product vector and gravity vector at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct DynTriple {
    pub m: DMatrix<f64>,
    pub c: DVector<f64>,
    pub g: DVector<f64>,
}

/// Dynamics of a revolute chain with a chosen gravity vector.
#[derive(Debug, Clone)]
pub struct Dynamics<'a> {
    model: &'a RobotModel,
    pseudo: Vec<Matrix4<f64>>,
    /// Gravity row `(g_x, g_y, g_z, 0)`.
    gravity: RowVector4<f64>,
}

impl<'a> Dynamics<'a> {
    /// Standard gravity along the base −z axis.
    pub fn new(model: &'a RobotModel) -> Result<Self> {
        ensure_revolute(model)?;
        Ok(Self {
            model,
            pseudo: model.inertias().iter().map(pseudo_inertia).collect(),
            gravity: RowVector4::new(0.0, 0.0, -STANDARD_GRAVITY, 0.0),
        })
    }

    pub fn with_gravity(mut self, g: Vector3<f64>) -> Self {
        self.gravity = RowVector4::new(g.x, g.y, g.z, 0.0);
        self
    }

    pub fn gravity(&self) -> Vector3<f64> {
        Vector3::new(self.gravity[0], self.gravity[1], self.gravity[2])
    }

    pub fn pseudo_inertias(&self) -> &[Matrix4<f64>] {
        &self.pseudo
    }

    fn n(&self) -> usize {
        self.model.dof()
    }

    /// `M_ik = Σ_{j ≥ max(i,k)} Tr(U_jk J_j U_jiᵀ)`.
    pub fn mass_matrix(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let u = UMatrices::new(self.model, q)?;
        Ok(self.mass_from(&u))
    }

    fn mass_from(&self, u: &UMatrices) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 1..=n {
            for k in 1..=n {
                m[(i - 1, k - 1)] = (i.max(k)..=n)
                    .map(|j| trace_ajbt(&u.u(j, k), &self.pseudo[j - 1], &u.u(j, i)))
                    .sum();
            }
        }
        m
    }

    /// `h_ikm = Σ_{j ≥ max(i,k,m)} Tr(U_jkm J_j U_jiᵀ)` (1-based).
    pub fn h(&self, q: &[f64], i: usize, k: usize, m: usize) -> Result<f64> {
        let u = UMatrices::new(self.model, q)?;
        for (what, idx) in [("joint", i), ("joint", k), ("joint", m)] {
            u.check(what, idx)?;
        }
        Ok(self.h_from(&u, i, k, m))
    }

    fn h_from(&self, u: &UMatrices, i: usize, k: usize, m: usize) -> f64 {
        let start = i.max(k).max(m);
        (start..=self.n())
            .map(|j| trace_ajbt(&u.u2(j, k, m), &self.pseudo[j - 1], &u.u(j, i)))
            .sum()
    }

    /// `C_i = Σ_k Σ_m h_ikm q̇_k q̇_m`.
    pub fn coriolis_vector(&self, q: &[f64], qdot: &[f64]) -> Result<DVector<f64>> {
        check_len(self.n(), qdot.len())?;
        let u = UMatrices::new(self.model, q)?;
        Ok(self.coriolis_from(&u, qdot))
    }

    fn coriolis_from(&self, u: &UMatrices, qdot: &[f64]) -> DVector<f64> {
        let n = self.n();
        DVector::from_fn(n, |i, _| {
            let mut s = 0.0;
            for k in 1..=n {
                for m in 1..=n {
                    let w = qdot[k - 1] * qdot[m - 1];
                    if w != 0.0 {
                        s += self.h_from(u, i + 1, k, m) * w;
                    }
                }
            }
            s
        })
    }

    /// `G_i = Σ_{j ≥ i} −m_j g U_ji r̄_j`.
    pub fn gravity_vector(&self, q: &[f64]) -> Result<DVector<f64>> {
        let u = UMatrices::new(self.model, q)?;
        Ok(self.gravity_from(&u))
    }

    fn gravity_from(&self, u: &UMatrices) -> DVector<f64> {
        let n = self.n();
        let inertias = self.model.inertias();
        DVector::from_fn(n, |i, _| {
            (i + 1..=n)
                .map(|j| {
                    let link = &inertias[j - 1];
                    -link.mass * (self.gravity * u.u(j, i + 1) * link.com_homogeneous())[0]
                })
                .sum()
        })
    }

    pub fn triple(&self, q: &[f64], qdot: &[f64]) -> Result<DynTriple> {
        check_len(self.n(), qdot.len())?;
        let u = UMatrices::new(self.model, q)?;
        Ok(DynTriple {
            m: self.mass_from(&u),
            c: self.coriolis_from(&u, qdot),
            g: self.gravity_from(&u),
        })
    }

    /// `τ = M q̈ + C + G`.
    pub fn inverse_dynamics(&self, q: &[f64], qdot: &[f64], qddot: &[f64]) -> Result<DVector<f64>> {
        check_len(self.n(), qddot.len())?;
        let t = self.triple(q, qdot)?;
        Ok(t.m * DVector::from_column_slice(qddot) + t.c + t.g)
    }

    /// `K = ½ Σ_i Σ_j Σ_k Tr(U_ij J_i U_ikᵀ) q̇_j q̇_k`, summed as `½ Σ_i Tr(Ṫ_i J_i Ṫ_iᵀ)`.
    pub fn kinetic_energy(&self, q: &[f64], qdot: &[f64]) -> Result<f64> {
        check_len(self.n(), qdot.len())?;
        let u = UMatrices::new(self.model, q)?;
        let n = self.n();
        let mut k = 0.0;
        for i in 1..=n {
            let mut t_dot = Matrix4::zeros();
            for j in 1..=i {
                t_dot += u.u(i, j) * qdot[j - 1];
            }
            k += trace_ajbt(&t_dot, &self.pseudo[i - 1], &t_dot);
        }
        Ok(0.5 * k)
    }

    /// `P = Σ −m_i g T_i r̄_i`.
    pub fn potential_energy(&self, q: &[f64]) -> Result<f64> {
        let frames = frame_transforms(self.model, q)?;
        Ok(self
            .model
            .inertias()
            .iter()
            .zip(&frames[1..])
            .map(|(link, f)| {
                -link.mass * (self.gravity * f.to_homogeneous() * link.com_homogeneous())[0]
            })
            .sum())
    }
}

pub fn mass_matrix(model: &RobotModel, q: &[f64]) -> Result<DMatrix<f64>> {
    Dynamics::new(model)?.mass_matrix(q)
}

pub fn coriolis_vector(model: &RobotModel, q: &[f64], qdot: &[f64]) -> Result<DVector<f64>> {
    Dynamics::new(model)?.coriolis_vector(q, qdot)
}

pub fn gravity_vector(model: &RobotModel, q: &[f64]) -> Result<DVector<f64>> {
    Dynamics::new(model)?.gravity_vector(q)
}

pub fn inverse_dynamics(
    model: &RobotModel,
    q: &[f64],
    qdot: &[f64],
    qddot: &[f64],
) -> Result<DVector<f64>> {
    Dynamics::new(model)?.inverse_dynamics(q, qdot, qddot)
}

pub fn kinetic_energy(model: &RobotModel, q: &[f64], qdot: &[f64]) -> Result<f64> {
    Dynamics::new(model)?.kinetic_energy(q, qdot)
}

pub fn potential_energy(model: &RobotModel, q: &[f64]) -> Result<f64> {
    Dynamics::new(model)?.potential_energy(q)
}
