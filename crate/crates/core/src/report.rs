//! Shared report plumbing: the normalization note that accompanies every
//! operator-relation report, and deterministic number formatting for JSON
//! and CSV output.

/// One-line account of the scaling conventions used by the verification
/// reports, attached wherever a reader could be bitten by them.
pub const NORMALIZATION_NOTE: &str = "generators s_i are unnormalized isometries (s_i* s_j = δ_ij); \
the scaled shift Ŝ = d^{-1/2}·Σ_i s_i satisfies Ŝ*Ŝ = 1 and Ŝ*·ι(a)·Ŝ = ι(L(a)) \
with L(a) = (1/d)·Σ_i a∘γ_i; the redundancy identity is checked in the \
un-normalized preimage-sum form b = Σ_k √φ_k · Σ_i (√φ_k·b)∘γ_i∘γ.";

/// Rounds to 15 significant digits through the decimal representation, so
/// equal reports are byte-identical regardless of how the value was computed.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.14e}").parse().expect("round-trip of a finite float")
}

/// Fixed 15-significant-digit decimal rendering for JSON/CSV payloads.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.14e}");
    // Normalize the exponent form ("1.50000000000000e2" → "1.5e2") so output
    // is compact and stable.
    let (mantissa, exponent) = s.split_once('e').expect("scientific notation");
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    let exp: i32 = exponent.parse().expect("exponent");
    if exp == 0 {
        mantissa.to_string()
    } else {
        format!("{mantissa}e{exp}")
    }
}
