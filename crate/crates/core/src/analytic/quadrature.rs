//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

// Nodes and weights keep their published digits.
#![allow(clippy::excessive_precision)]

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = half * XGK[j];
        let pair = f(center - x) + f(center + x);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Result of [`integrate`]: the estimate and its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
}

/// Integrates `f` over `[a, b]`, starting from `initial` equal pieces and
/// bisecting the worst segment until the estimated error drops below
/// `rel_tol · |I|` or `max_segments` is reached.
///
/// Fails when the final relative error estimate exceeds `fail_tol`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    initial: usize,
    rel_tol: f64,
    fail_tol: f64,
    max_segments: usize,
) -> Result<Quadrature> {
    let initial = initial.max(1);
    let width = (b - a) / initial as f64;
    let mut segs: Vec<Segment> = (0..initial)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == initial { b } else { lo + width };
            gk15(&f, lo, hi)
        })
        .collect();
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        let scale = value.abs().max(f64::MIN_POSITIVE);
        if error <= rel_tol * scale || segs.len() >= max_segments {
            if !value.is_finite() || error > fail_tol * scale {
                return Err(Error::Quadrature {
                    estimate: error / scale,
                });
            }
            return Ok(Quadrature {
                value,
                abs_error: error,
            });
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("non-empty");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segs.push(gk15(&f, s.a, mid));
        segs.push(gk15(&f, mid, s.b));
    }
}
