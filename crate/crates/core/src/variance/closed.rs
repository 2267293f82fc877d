use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schemes::{Budget, Parameter, ParameterKind, Scheme};
use crate::states::Direction;

/// State families with exact closed-form estimator variances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateFamily {
    /// Many-body singlet, `N` even.
    Singlet,
    /// `|D_{N,N/2}>`, `N` even.
    DickeHalf,
}

fn poly(n: i128, coeffs: &[i128]) -> i128 {
    coeffs.iter().fold(0, |acc, &c| acc * n + c)
}

/// Exact variance of the parameter estimate for a family member, as a
/// rational number. Supported: `xi_b` and `xi_d` for the singlet (any axes)
/// and `xi_c` for `|D_{N,N/2}>` with `m = z`. RP1 requires `K = 1`.
pub fn closed_form(
    scheme: Scheme,
    parameter: &Parameter,
    family: StateFamily,
    n_qubits: usize,
    budget: Budget,
) -> Result<Ratio<i128>> {
    budget.validate(scheme)?;
    if n_qubits < 2 || n_qubits % 2 != 0 {
        return Err(Error::UnsupportedClosedForm(format!(
            "family needs an even N >= 2, got {n_qubits}"
        )));
    }
    let unsupported = || {
        Err(Error::UnsupportedClosedForm(format!(
            "{parameter} for {family:?} under {scheme}"
        )))
    };
    match (family, parameter.kind) {
        (StateFamily::Singlet, ParameterKind::B | ParameterKind::D) => {}
        (StateFamily::DickeHalf, ParameterKind::C) if parameter.axes[2] == Direction::Z => {}
        _ => return unsupported(),
    }
    if scheme == Scheme::Rp1 && budget.k != 1 {
        return Err(Error::UnsupportedClosedForm(format!(
            "RP1 closed forms assume K = 1, got K = {}",
            budget.k
        )));
    }
    let n = n_qubits as i128;
    let k = budget.k as i128;
    let l = budget.l.unwrap_or(0) as i128;
    let w = n - 1;
    let r = Ratio::new;
    Ok(match (family, parameter.kind, scheme) {
        (StateFamily::Singlet, _, Scheme::Ts) => Ratio::zero(),
        (StateFamily::Singlet, ParameterKind::B, Scheme::Ap1) => r(
            3 * n * (k * (n - 2) * w.pow(4) + poly(n, &[-1, 6, -13, 14, -7, 2])),
            16 * (k - 1) * k * w.pow(4),
        ),
        (StateFamily::Singlet, ParameterKind::B, Scheme::Ap2) => r(3 * n * (3 * n - 2), 16 * k),
        (StateFamily::Singlet, ParameterKind::B, Scheme::Rp1) => r(
            3 * n.pow(3) * (l * (n - 2) * w * w + poly(n, &[2, -3, 2])),
            16 * (l - 1) * l * w * w,
        ),
        (StateFamily::Singlet, ParameterKind::B, Scheme::Rp2) => r(3 * n.pow(3) * (3 * n - 2), 16 * k * l),
        (StateFamily::Singlet, ParameterKind::D, Scheme::Ap1) => r(
            n * (k * w * w * poly(n, &[2, -8, 11, -6]) + poly(n, &[-2, 12, -27, 32, -19, 6])),
            16 * (k - 1) * k * w * w,
        ),
        (StateFamily::Singlet, ParameterKind::D, Scheme::Ap2) => r(n * poly(n, &[6, -16, 15, -6]), 16 * k),
        (StateFamily::Singlet, ParameterKind::D, Scheme::Rp1) => r(
            n.pow(3) * (l * poly(n, &[2, -8, 11, -6]) + poly(n, &[4, -7, 6])),
            16 * (l - 1) * l,
        ),
        (StateFamily::Singlet, ParameterKind::D, Scheme::Rp2) => r(n.pow(3) * poly(n, &[6, -16, 15, -6]), 16 * k * l),
        (StateFamily::DickeHalf, _, Scheme::Ts) => r(n * poly(n, &[1, 4, -4, -16]), 64 * k),
        (StateFamily::DickeHalf, _, Scheme::Ap1) => r(
            n * (k * poly(n, &[2, -10, 21, -25, 16, -4]) + poly(n, &[-2, 10, -19, 21, -12, 4])),
            32 * (k - 1) * k * w * w,
        ),
        (StateFamily::DickeHalf, _, Scheme::Ap2) => r(n * poly(n, &[6, -20, 25, -16, 4]), 32 * k * w),
        (StateFamily::DickeHalf, _, Scheme::Rp1) => r(
            n * n * (l * poly(n, &[2, -8, 13, -12, 4]) + poly(n, &[4, -9, 12, -4])),
            32 * (l - 1) * l,
        ),
        (StateFamily::DickeHalf, _, Scheme::Rp2) => r(n * n * poly(n, &[6, -16, 17, -12, 4]), 32 * k * l),
        _ => return unsupported(),
    })
}

pub fn closed_form_f64(
    scheme: Scheme,
    parameter: &Parameter,
    family: StateFamily,
    n_qubits: usize,
    budget: Budget,
) -> Result<f64> {
    let exact = closed_form(scheme, parameter, family, n_qubits, budget)?;
    Ok(*exact.numer() as f64 / *exact.denom() as f64)
}
