//! Regression basis families.
//!
//! All polynomial families act on the *sorted* coordinate vector
//! X_(1) <= ... <= X_(d) (order statistics), which makes the regressors
//! permutation-invariant: exchangeable assets carry no labeling information,
//! and sorting concentrates explanatory power in far fewer terms.
//!
//! The `aux` scalar is a product-supplied feature: the discounted current
//! payoff g_j(x) for the payoff-augmented family, or the discounted date-j
//! net coupon for the swap families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisFamily {
    /// 1, X_(i)
    #[serde(alias = "1,X_(i)", alias = "1, X_i")]
    Linear,
    /// 1, X_(i), X_(i)X_(j)
    #[serde(alias = "1,X_(i),X_(i)X_(j)", alias = "1, X_i, X_iX_j")]
    Quadratic,
    /// 1, X_(i), g(X)
    #[serde(alias = "1,X_(i),g(X)", alias = "1, X_i, g(X)", alias = "g(X)")]
    Payoff,
    /// 1, C, X_(i) - linear family with the net-coupon feature
    #[serde(alias = "1,C,X_(i)", alias = "1, C, X_(i)")]
    SwapLinear,
    /// 1, C, X_(i), X_(i)X_(j)
    #[serde(alias = "1,C,X_(i),X_(i)X_(j)")]
    SwapQuadratic,
}

impl BasisFamily {
    /// Number of basis functions for state dimension d.
    pub fn size(&self, d: usize) -> usize {
        match self {
            BasisFamily::Linear => 1 + d,
            BasisFamily::Quadratic => 1 + d + d * (d + 1) / 2,
            BasisFamily::Payoff => 2 + d,
            BasisFamily::SwapLinear => 2 + d,
            BasisFamily::SwapQuadratic => 2 + d + d * (d + 1) / 2,
        }
    }

    pub fn uses_aux(&self) -> bool {
        !matches!(self, BasisFamily::Linear | BasisFamily::Quadratic)
    }

    pub fn is_swap_family(&self) -> bool {
        matches!(self, BasisFamily::SwapLinear | BasisFamily::SwapQuadratic)
    }

    /// Short machine-friendly name used in CSV output.
    /// Stable machine-readable name (the serde identifier).
    pub fn name(&self) -> &'static str {
        match self {
            BasisFamily::Linear => "linear",
            BasisFamily::Quadratic => "quadratic",
            BasisFamily::Payoff => "payoff",
            BasisFamily::SwapLinear => "swap-linear",
            BasisFamily::SwapQuadratic => "swap-quadratic",
        }
    }

    /// Display label listing the regressors.
    pub fn label(&self) -> &'static str {
        match self {
            BasisFamily::Linear => "1,X_(i)",
            BasisFamily::Quadratic => "1,X_(i),X_(i)X_(j)",
            BasisFamily::Payoff => "1,X_(i),g(X)",
            BasisFamily::SwapLinear => "1,C,X_(i)",
            BasisFamily::SwapQuadratic => "1,C,X_(i),X_(i)X_(j)",
        }
    }

    /// Evaluate the family at state `x` with product feature `aux`,
    /// writing `self.size(d)` values into `out`. `scratch` holds the sorted
    /// coordinates between calls to avoid reallocation.
    pub fn eval(&self, x: &[f64], aux: f64, scratch: &mut Vec<f64>, out: &mut [f64]) {
        let d = x.len();
        scratch.clear();
        scratch.extend_from_slice(x);
        scratch.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let mut k = 0;
        out[k] = 1.0;
        k += 1;
        if self.is_swap_family() {
            out[k] = aux;
            k += 1;
        }
        out[k..k + d].copy_from_slice(scratch);
        k += d;
        if matches!(self, BasisFamily::Quadratic | BasisFamily::SwapQuadratic) {
            for i in 0..d {
                for j in i..d {
                    out[k] = scratch[i] * scratch[j];
                    k += 1;
                }
            }
        }
        if matches!(self, BasisFamily::Payoff) {
            out[k] = aux;
            k += 1;
        }
        debug_assert_eq!(k, self.size(d));
    }

    /// Parse a family name, accepting both canonical names and display labels.
    pub fn parse(s: &str) -> Result<BasisFamily> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "linear" | "1,X_(i)" | "1,X_i" => Ok(BasisFamily::Linear),
            "quadratic" | "1,X_(i),X_(i)X_(j)" | "1,X_i,X_iX_j" => Ok(BasisFamily::Quadratic),
            "payoff" | "1,X_(i),g(X)" | "1,X_i,g(X)" | "g(X)" => Ok(BasisFamily::Payoff),
            "swap-linear" | "1,C,X_(i)" => Ok(BasisFamily::SwapLinear),
            "swap-quadratic" | "1,C,X_(i),X_(i)X_(j)" => Ok(BasisFamily::SwapQuadratic),
            _ => Err(Error::config(format!("unknown basis family '{s}'"))),
        }
    }
}

/// Check that the product/basis/method combination is admissible.
pub fn validate_combo(is_swap: bool, family: BasisFamily, reinforced: bool) -> Result<()> {
    if is_swap != family.is_swap_family() {
        return Err(Error::config(format!(
            "basis '{}' does not fit this product (swap products take the swap families)",
            family.label()
        )));
    }
    if reinforced && family == BasisFamily::Payoff {
        return Err(Error::config(
            "basis '1,X_(i),g(X)' is redundant for reinforced methods: the payoff already \
             enters through the reinforced regressor nu = max(g, C) at the last backward step; \
             use 'linear' or 'quadratic' instead",
        ));
    }
    Ok(())
}
