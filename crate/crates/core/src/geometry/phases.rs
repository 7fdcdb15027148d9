use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use super::colouring::Colouring;
use super::partition::Partition;
use crate::{invalid, Error, Result};

/// Per-interface δ strengths `α` and δ′ strengths `β`.
///
/// `β = +∞` is allowed and means `β⁻¹ = 0` (no coupling).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InteractionData {
    pub alpha: BTreeMap<usize, f64>,
    pub beta: BTreeMap<usize, f64>,
}

impl InteractionData {
    /// Same `α` and `β` on every interface of `p`.
    pub fn uniform(p: &Partition, alpha: f64, beta: f64) -> Result<Self> {
        let ids: Vec<usize> = p.interface_ids().collect();
        Self::from_maps(p, ids.iter().map(|&i| (i, alpha)).collect(), ids.iter().map(|&i| (i, beta)).collect())
    }

    pub fn from_maps(p: &Partition, alpha: BTreeMap<usize, f64>, beta: BTreeMap<usize, f64>) -> Result<Self> {
        for id in p.interface_ids() {
            if !alpha.contains_key(&id) || !beta.contains_key(&id) {
                return Err(Error::MissingInterface(id));
            }
        }
        let known = |id: &usize| p.interface(*id).is_some();
        if let Some(id) = alpha.keys().chain(beta.keys()).find(|id| !known(id)) {
            return Err(invalid("interaction", format!("interface {id} does not exist")));
        }
        if alpha.values().any(|a| !a.is_finite()) {
            return Err(invalid("alpha", "must be finite"));
        }
        if beta.values().any(|b| b.is_nan() || *b <= 0.0) {
            return Err(invalid("beta", "beta must be strictly positive"));
        }
        Ok(InteractionData { alpha, beta })
    }

    pub fn alpha(&self, id: usize) -> Result<f64> {
        self.alpha.get(&id).copied().ok_or(Error::MissingInterface(id))
    }

    pub fn beta(&self, id: usize) -> Result<f64> {
        self.beta.get(&id).copied().ok_or(Error::MissingInterface(id))
    }

    pub fn beta_inverse(&self, id: usize) -> Result<f64> {
        self.beta(id).map(|b| 1.0 / b)
    }
}

/// Unit phases `z_k = exp(2πiφ(k)/χ)` and the induced δ strengths
/// `α_Z = |z_k − z_l|²/β_kl`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PhaseAssignment {
    pub chi: usize,
    /// `z[k − 1]` is the phase of subdomain `k`.
    pub z: Vec<Complex64>,
    pub alpha_z: BTreeMap<usize, f64>,
}

impl PhaseAssignment {
    pub fn phase(&self, k: usize) -> Complex64 {
        self.z[k - 1]
    }
}

/// `exp(2πi j/χ)`, exact at quarter turns and for `χ = 3`.
fn root_of_unity(j: usize, chi: usize) -> Complex64 {
    let j = j % chi;
    if (4 * j) % chi == 0 {
        return match 4 * j / chi {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    if chi == 3 {
        let s = 3.0.sqrt() / 2.0;
        return Complex64::new(-0.5, if j == 1 { s } else { -s });
    }
    let t = 2.0 * PI * j as f64 / chi as f64;
    Complex64::new(t.cos(), t.sin())
}

pub fn phase_assignment(p: &Partition, c: &Colouring, d: &InteractionData) -> Result<PhaseAssignment> {
    if c.phi.len() != p.subdomain_count() {
        return Err(Error::DimensionMismatch { expected: p.subdomain_count(), got: c.phi.len() });
    }
    let z: Vec<Complex64> = c.phi.iter().map(|&f| root_of_unity(f, c.chi.max(1))).collect();
    let bound = if c.chi >= 2 { edge_constant(c.chi)? } else { 0.0 };
    let mut alpha_z = BTreeMap::new();
    for iface in p.interfaces() {
        let w = (z[iface.k - 1] - z[iface.l - 1]).norm_sqr();
        if w < bound - 1e-12 {
            return Err(Error::Inconsistent(format!(
                "subdomains {} and {} share interface {} but |z_k − z_l|² = {w}",
                iface.k, iface.l, iface.id
            )));
        }
        alpha_z.insert(iface.id, w / d.beta(iface.id)?);
    }
    Ok(PhaseAssignment { chi: c.chi, z, alpha_z })
}

/// Smallest squared side `4 sin²(π/χ)` between distinct `χ`-th roots of unity.
pub fn edge_constant(chi: usize) -> Result<f64> {
    match chi {
        0 | 1 => Err(invalid("chi", "edge constant needs at least two colours")),
        2 => Ok(4.0),
        3 => Ok(3.0),
        4 => Ok(2.0),
        6 => Ok(1.0),
        _ => {
            let s = (PI / chi as f64).sin();
            Ok(4.0 * s * s)
        }
    }
}

/// Whether `β ≤ 4 sin²(π/χ)/α`, the condition under which the forms are ordered.
pub fn is_admissible(chi: usize, alpha: f64, beta: f64) -> Result<bool> {
    Ok(alpha > 0.0 && beta > 0.0 && alpha * beta <= edge_constant(chi)? * (1.0 + 1e-14))
}
