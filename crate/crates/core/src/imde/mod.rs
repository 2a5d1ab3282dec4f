//! Inverse modified differential equations: coefficient fields,
//! closed forms, structural checks and truncation diagnostics.

pub mod closed_form;
pub mod diagnostics;
pub mod engine;
pub mod hamiltonian;

pub use closed_form::{closed_form_coefficients, closed_form_imde, symplectic_euler_field};
pub use diagnostics::{truncation_diagnostics, TruncationDiagnostics};
pub use engine::{composition_invariance_defect, ExpandableField, ImdeField, ImdeMethod};
pub use hamiltonian::{hamiltonicity_defect, jacobian};

use crate::algebra::tower;
use crate::algebra::{FieldExpr, Scalar};
use crate::error::Result;
use crate::integrators::{LmmScheme, Method};

/// `f_k(x)` for a one-step method.
pub fn imde_coefficient<F: ExpandableField>(method: &Method, f: F, x: &[f64], k: usize) -> Result<Vec<f64>> {
    ImdeField::new(f, ImdeMethod::one_step(method.clone()), k)?.coefficient(x, k)
}

/// `f_k(x)` for a multistep scheme.
pub fn lmm_imde_coefficient(scheme: &LmmScheme, f: &FieldExpr, x: &[f64], k: usize) -> Result<Vec<f64>> {
    let fs = engine::multistep_coefficients(f, scheme, &tower::lift(x), k)?;
    Ok(fs[k].iter().map(|v| v.value()).collect())
}

/// `sum_{k <= K} h^k f_k(x)`.
pub fn imde_truncated_eval<F: ExpandableField>(imde: &ImdeField<F>, x: &[f64], h: f64) -> Result<Vec<f64>> {
    imde.truncated_eval(x, h)
}

/// Largest absolute entry; used as the scale of relative comparisons.
pub fn scale_of(v: &[f64]) -> f64 {
    v.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
}
