//! Adaptive Gauss–Kronrod quadrature for checking closed-form integrals in tests.
//!
//! This crate is deliberately independent of the solver crate: it shares no
//! code with the production quadrature rules or the erf-based primitives, so
//! agreement between the two is meaningful.

#![allow(clippy::excessive_precision)]

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for i in 0..7 {
        let dx = hw * XGK[i];
        let (fl, fr) = (f(c - dx), f(c + dx));
        kronrod += WGK[i] * (fl + fr);
        abs_sum += WGK[i] * (fl.abs() + fr.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (fl + fr);
        }
    }
    // Estimates below the rounding level of the sum carry no information.
    let err = ((kronrod - gauss) * hw).abs();
    let noise = 50.0 * f64::EPSILON * abs_sum * hw.abs();
    (kronrod * hw, if err <= noise { 0.0 } else { err })
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, err: f64, tol: f64, depth: u32) -> f64 {
    if err <= tol || depth == 0 || b - a <= f64::EPSILON * (a.abs() + b.abs()) {
        return whole;
    }
    let m = 0.5 * (a + b);
    let (l, el) = gk15(f, a, m);
    let (r, er) = gk15(f, m, b);
    adapt(f, a, m, l, el, 0.5 * tol, depth - 1) + adapt(f, m, b, r, er, 0.5 * tol, depth - 1)
}

/// Integrates `f` over `[a, b]` to roughly `max(abs_tol, rel_tol · |I|)`.
///
/// `breaks` are extra interior points (e.g. the location of a narrow peak)
/// at which the interval is split before adaptation starts.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, breaks, abs_tol, rel_tol);
    }
    let mut cuts: Vec<f64> = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();

    // First pass gives the magnitude used to turn rel_tol into an absolute target.
    let pieces: Vec<(f64, f64, f64, f64)> = cuts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    let rough: f64 = pieces.iter().map(|p| p.2.abs()).sum();
    let target = abs_tol.max(rel_tol * rough);
    let total_len = b - a;
    pieces
        .iter()
        .map(|&(lo, hi, v, e)| adapt(&f, lo, hi, v, e, target * (hi - lo) / total_len, 60))
        .sum()
}

/// Iterated 2D integral over `[a0, b0] × [a1, b1]` of `f(x, y)`.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    (a0, b0): (f64, f64),
    (a1, b1): (f64, f64),
    breaks0: &[f64],
    breaks1: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> f64 {
    integrate(
        |x| integrate(|y| f(x, y), a1, b1, breaks1, 0.1 * abs_tol, rel_tol),
        a0,
        b0,
        breaks0,
        abs_tol,
        rel_tol,
    )
}

/// Breakpoints at `center + k·width` for `k = -spread..=spread`; useful for a
/// Gaussian bump of the given width so the adaptive search cannot miss it.
pub fn gaussian_breaks(center: f64, width: f64, spread: i32) -> Vec<f64> {
    (-spread..=spread).map(|k| center + k as f64 * width).collect()
}
