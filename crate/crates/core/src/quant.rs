//! Integer weight/bias representation, affine dequantization and the
//! shift-and-add constant-multiplier model.
//!
//! The accelerator stores quantized layer parameters and dequantizes them
//! on the way into the floating-point membrane arithmetic, so the
//! functional contract here is that dequantizing per access is
//! bit-identical to dequantizing the whole tensor up front.

use alloc::vec::Vec;

use crate::tensor::Tensor;
use crate::{Error, Result};

/// Maximum number of add/subtract terms the shift-and-add multiplier may
/// spend on one constant.
pub const SHIFT_ADD_TERM_BUDGET: usize = 8;

/// Affine quantization parameters for one tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct QuantParams {
    bit_width: u8,
    scale_factor: f64,
    zero_point: i32,
}

impl QuantParams {
    pub fn new(bit_width: u8, scale_factor: f64, zero_point: i32) -> Result<Self> {
        if !matches!(bit_width, 4 | 8 | 16 | 32) {
            return Err(Error::InvalidParam {
                context: "bit width must be 4, 8, 16 or 32",
            });
        }
        if !(scale_factor.is_finite() && scale_factor > 0.0) {
            return Err(Error::InvalidParam {
                context: "scale factor must be positive and finite",
            });
        }
        let p = Self {
            bit_width,
            scale_factor,
            zero_point,
        };
        if i64::from(zero_point) < p.qmin() || i64::from(zero_point) > p.qmax() {
            return Err(Error::QuantRange {
                value: i64::from(zero_point),
                bit_width,
            });
        }
        Ok(p)
    }

    pub fn bit_width(&self) -> u8 {
        self.bit_width
    }

    pub fn scale_factor(&self) -> f64 {
        self.scale_factor
    }

    pub fn zero_point(&self) -> i32 {
        self.zero_point
    }

    /// Smallest representable integer, `-2^(bits-1)`.
    pub fn qmin(&self) -> i64 {
        -(1i64 << (self.bit_width - 1))
    }

    /// Largest representable integer, `2^(bits-1) - 1`.
    pub fn qmax(&self) -> i64 {
        (1i64 << (self.bit_width - 1)) - 1
    }
}

/// An integer tensor plus its quantization parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantTensor {
    values: Vec<i32>,
    dims: Vec<usize>,
    params: QuantParams,
}

impl QuantTensor {
    pub fn new(values: Vec<i32>, dims: &[usize], params: QuantParams) -> Result<Self> {
        let len: usize = dims.iter().product();
        if values.len() != len {
            return Err(Error::ShapeMismatch {
                context: "quant tensor data length does not match dims",
            });
        }
        for &v in &values {
            if i64::from(v) < params.qmin() || i64::from(v) > params.qmax() {
                return Err(Error::QuantRange {
                    value: i64::from(v),
                    bit_width: params.bit_width(),
                });
            }
        }
        Ok(Self {
            values,
            dims: dims.to_vec(),
            params,
        })
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn params(&self) -> &QuantParams {
        &self.params
    }

    /// Dequantized value at a flat offset.
    #[inline]
    pub fn dequant_at(&self, flat: usize) -> f64 {
        affine_dequant(self.values[flat], &self.params)
    }

    /// Dequantize the whole tensor into reals.
    pub fn dequantize_all(&self) -> Tensor {
        let data = self
            .values
            .iter()
            .map(|&q| affine_dequant(q, &self.params))
            .collect();
        Tensor::from_vec(&self.dims, data).expect("dims validated at construction")
    }
}

#[inline]
fn affine_dequant(q: i32, params: &QuantParams) -> f64 {
    (i64::from(q) - i64::from(params.zero_point())) as f64 * params.scale_factor()
}

/// Affine dequantization: `(q - zero_point) * scale_factor`.
pub fn dequantize(q: i32, params: &QuantParams) -> Result<f64> {
    if i64::from(q) < params.qmin() || i64::from(q) > params.qmax() {
        return Err(Error::QuantRange {
            value: i64::from(q),
            bit_width: params.bit_width(),
        });
    }
    Ok(affine_dequant(q, params))
}

/// Symmetric-range affine fit of a real tensor.
///
/// `scale = max(|t|) / (2^(bits-1) - 1)`, zero point 0, values rounded
/// half-to-even and clamped. An all-zero tensor gets scale 1.0.
pub fn quantize_tensor(t: &Tensor, bit_width: u8) -> Result<QuantTensor> {
    if !t.all_finite() {
        return Err(Error::NonFinite {
            context: "tensor to quantize",
        });
    }
    let probe = QuantParams::new(bit_width, 1.0, 0)?;
    let qmax = probe.qmax() as f64;
    let max_abs = t.data().iter().fold(0.0f64, |m, &v| m.max(fabs(v)));
    let scale = if max_abs == 0.0 { 1.0 } else { max_abs / qmax };
    let params = QuantParams::new(bit_width, scale, 0)?;
    let (lo, hi) = (params.qmin() as f64, params.qmax() as f64);
    let values = t
        .data()
        .iter()
        .map(|&v| round_ties_even(v / scale).clamp(lo, hi) as i32)
        .collect();
    QuantTensor::new(values, t.dims(), params)
}

/// Layer coefficients: either plain reals, or integers that are
/// dequantized on every access exactly as the hardware would.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Real(Tensor),
    Quant(QuantTensor),
}

impl Coefficients {
    pub fn dims(&self) -> &[usize] {
        match self {
            Coefficients::Real(t) => t.dims(),
            Coefficients::Quant(q) => q.dims(),
        }
    }

    pub fn len(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn value(&self, flat: usize) -> f64 {
        match self {
            Coefficients::Real(t) => t.data()[flat],
            Coefficients::Quant(q) => q.dequant_at(flat),
        }
    }

    /// The pre-dequantized twin of these coefficients.
    pub fn to_real(&self) -> Tensor {
        match self {
            Coefficients::Real(t) => t.clone(),
            Coefficients::Quant(q) => q.dequantize_all(),
        }
    }
}

/// One signed power-of-two term of a shift-and-add decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsdTerm {
    pub shift: u32,
    /// `+1` or `-1`.
    pub sign: i8,
}

/// Canonical-signed-digit decomposition of an integer multiplier.
///
/// Produces the minimal-weight signed-digit form (no two adjacent
/// non-zero digits), which is what makes the multiplier cheap: each term
/// is one shifted add or subtract.
pub fn csd_decompose(multiplier: i64) -> Vec<CsdTerm> {
    let mut m = multiplier;
    let mut shift = 0u32;
    let mut terms = Vec::new();
    while m != 0 {
        if m & 1 == 1 {
            // m mod 4 decides the digit: 1 -> +1, 3 -> -1.
            let digit: i64 = if m & 3 == 1 { 1 } else { -1 };
            terms.push(CsdTerm {
                shift,
                sign: digit as i8,
            });
            m -= digit;
        }
        m >>= 1;
        shift += 1;
    }
    terms
}

/// Multiply `x` by the constant `c` at `frac_bits` fixed-point precision
/// using shifted adds only.
///
/// Returns the product `x * round(c * 2^frac_bits)` and the number of
/// add/subtract terms spent (the hardware-cost proxy). Fails when the
/// constant needs more than [`SHIFT_ADD_TERM_BUDGET`] terms.
pub fn shift_add_multiply(x: i64, c: f64, frac_bits: u32) -> Result<(i64, usize)> {
    if !c.is_finite() || frac_bits > 32 {
        return Err(Error::InvalidParam {
            context: "shift-add constant must be finite with frac_bits <= 32",
        });
    }
    let scaled = c * (1u64 << frac_bits) as f64;
    if fabs(scaled) >= (1i64 << 31) as f64 {
        return Err(Error::InvalidParam {
            context: "shift-add constant does not fit 32 bits at this precision",
        });
    }
    let multiplier = round_ties_even(scaled) as i64;
    let terms = csd_decompose(multiplier);
    if terms.len() > SHIFT_ADD_TERM_BUDGET {
        return Err(Error::ShiftAddBudget {
            terms: terms.len(),
            budget: SHIFT_ADD_TERM_BUDGET,
        });
    }
    let mut acc = 0i64;
    for t in &terms {
        let shifted = x << t.shift;
        acc += i64::from(t.sign) * shifted;
    }
    debug_assert_eq!(acc, x * multiplier);
    Ok((acc, terms.len()))
}

/// `|x|` without touching std.
#[inline]
pub(crate) fn fabs(x: f64) -> f64 {
    f64::from_bits(x.to_bits() & !(1u64 << 63))
}

/// Round to nearest integer, ties to even, without std.
///
/// Uses the 2^52 trick: adding and removing 2^52 forces the FPU to round
/// at integer granularity under the default round-to-nearest-even mode.
#[inline]
pub(crate) fn round_ties_even(x: f64) -> f64 {
    const TWO52: f64 = 4_503_599_627_370_496.0;
    if !x.is_finite() || fabs(x) >= TWO52 {
        return x;
    }
    if x >= 0.0 {
        (x + TWO52) - TWO52
    } else {
        (x - TWO52) + TWO52
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn round_ties_even_reference_cases() {
        let cases = [
            (0.5, 0.0),
            (1.5, 2.0),
            (2.5, 2.0),
            (3.5, 4.0),
            (-0.5, 0.0),
            (-1.5, -2.0),
            (-2.5, -2.0),
            (0.4999, 0.0),
            (1.2, 1.0),
            (-7.5, -8.0),
            (7.0, 7.0),
        ];
        for (x, want) in cases {
            assert_eq!(round_ties_even(x), want, "round({x})");
        }
    }

    #[test]
    fn dequantize_affine_cases() {
        let p = QuantParams::new(8, 0.5, 3).unwrap();
        assert_eq!(dequantize(3, &p).unwrap(), 0.0);
        assert_eq!(dequantize(4, &p).unwrap(), 0.5);
        let identity = QuantParams::new(4, 1.0, 0).unwrap();
        assert_eq!(dequantize(-3, &identity).unwrap(), -3.0);
    }

    #[test]
    fn dequantize_rejects_out_of_range() {
        let p = QuantParams::new(4, 1.0, 0).unwrap();
        assert!(matches!(
            dequantize(8, &p),
            Err(Error::QuantRange { value: 8, .. })
        ));
        assert!(dequantize(-8, &p).is_ok());
        assert!(dequantize(-9, &p).is_err());
    }

    #[test]
    fn dequantize_is_monotone() {
        let p = QuantParams::new(8, 0.25, -5).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for q in -128..=127 {
            let v = dequantize(q, &p).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn quant_params_validated() {
        assert!(QuantParams::new(5, 1.0, 0).is_err());
        assert!(QuantParams::new(4, 0.0, 0).is_err());
        assert!(QuantParams::new(4, -1.0, 0).is_err());
        assert!(QuantParams::new(4, 1.0, 8).is_err());
        assert!(QuantParams::new(4, 1.0, -8).is_ok());
    }

    #[test]
    fn quantize_all_zero_uses_unit_scale() {
        let t = Tensor::zeros(&[2, 2]);
        let q = quantize_tensor(&t, 4).unwrap();
        assert_eq!(q.params().scale_factor(), 1.0);
        assert!(q.values().iter().all(|&v| v == 0));
    }

    #[test]
    fn quantize_max_abs_fit() {
        let t = Tensor::from_vec(&[2], vec![-7.0, 7.0]).unwrap();
        let q = quantize_tensor(&t, 4).unwrap();
        assert_eq!(q.params().scale_factor(), 1.0);
        assert_eq!(q.values(), &[-7, 7]);
    }

    #[test]
    fn quantize_rounds_half_to_even() {
        let t = Tensor::from_vec(&[3], vec![7.0, 3.5, 2.5]).unwrap();
        let q = quantize_tensor(&t, 4).unwrap();
        assert_eq!(q.values(), &[7, 4, 2]);
    }

    #[test]
    fn quantize_roundtrip_within_half_scale() {
        let data = vec![0.93, -0.21, 0.48, -0.99, 0.02, 0.77];
        let t = Tensor::from_vec(&[6], data.clone()).unwrap();
        let q = quantize_tensor(&t, 4).unwrap();
        let scale = q.params().scale_factor();
        for (i, &orig) in data.iter().enumerate() {
            let back = q.dequant_at(i);
            assert!(
                (back - orig).abs() <= scale * 0.5000001,
                "element {i}: {back} vs {orig}"
            );
        }
    }

    #[test]
    fn csd_examples() {
        // 5 = 101b: two positive terms.
        let (v, terms) = shift_add_multiply(3, 5.0, 0).unwrap();
        assert_eq!((v, terms), (15, 2));
        assert_eq!((3i64 << 2) + 3, 15);
        // 7 = 1000b - 1: subtract form.
        let (v, terms) = shift_add_multiply(2, 7.0, 0).unwrap();
        assert_eq!((v, terms), (14, 2));
        assert_eq!((2i64 << 3) - 2, 14);
        // Zero constant costs nothing.
        let (v, terms) = shift_add_multiply(123, 0.0, 0).unwrap();
        assert_eq!((v, terms), (0, 0));
    }

    #[test]
    fn csd_is_nonadjacent_and_exact() {
        for m in -600i64..=600 {
            let terms = csd_decompose(m);
            let rebuilt: i64 = terms
                .iter()
                .map(|t| i64::from(t.sign) * (1i64 << t.shift))
                .sum();
            assert_eq!(rebuilt, m);
            for pair in terms.windows(2) {
                assert!(pair[1].shift > pair[0].shift + 1, "adjacent digits for {m}");
            }
        }
    }

    #[test]
    fn shift_add_respects_term_budget() {
        // 0x55555 has ten non-adjacent ones; over the 8-term budget.
        let c = 0x55555 as f64;
        assert!(matches!(
            shift_add_multiply(1, c, 0),
            Err(Error::ShiftAddBudget { terms: 10, .. })
        ));
    }

    #[test]
    fn shift_add_matches_integer_multiply() {
        let constants = [0.5, 1.25, 3.0, -2.75, 0.15, 10.125];
        for &c in &constants {
            let m = round_ties_even(c * 256.0) as i64;
            for x in [-300i64, -1, 0, 7, 1024] {
                let (v, _) = shift_add_multiply(x, c, 8).unwrap();
                assert_eq!(v, x * m, "x={x} c={c}");
            }
        }
    }

    #[test]
    fn fractional_precision_matters() {
        // beta = 0.15 at 8 fractional bits -> round(38.4) = 38.
        let (v, _) = shift_add_multiply(100, 0.15, 8).unwrap();
        assert_eq!(v, 3800);
    }

    #[test]
    fn quant_tensor_rejects_out_of_range_values() {
        let p = QuantParams::new(4, 1.0, 0).unwrap();
        assert!(QuantTensor::new(vec![7, -8], &[2], p).is_ok());
        assert!(matches!(
            QuantTensor::new(vec![8], &[1], p),
            Err(Error::QuantRange { .. })
        ));
    }
}
