//! Front end between raw samples and features: digital demodulation,
//! boxcar masking and non-overlapping window averaging.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::data::IQTrace;
use crate::error::{invalid, Result};

/// Default length of the moving-average low-pass applied after mixing.
pub const DEFAULT_DEMOD_FILTER_LEN: usize = 4;

/// Real multiplications charged per demodulated sample (one complex product).
pub const DEMOD_MULTIPLICATIONS_PER_SAMPLE: usize = 4;

/// Mixes `raw` down by `if_freq` (cycles per step) and low-passes it with a
/// causal moving average of `filter_len` samples.
///
/// The first `filter_len - 1` outputs average over the samples available so
/// far, so the output has the input's length.
pub fn demodulate(raw: &IQTrace, if_freq: f64, filter_len: usize) -> Result<IQTrace> {
    demodulate_prefix(raw, if_freq, filter_len, raw.len())
}

/// Demodulates only the first `len` output samples. The filter is causal,
/// so these equal the leading samples of the full demodulation.
pub(crate) fn demodulate_prefix(raw: &IQTrace, if_freq: f64, filter_len: usize, len: usize) -> Result<IQTrace> {
    if !(0.0..0.5).contains(&if_freq) {
        return Err(invalid("if_freq", "must lie in [0, 0.5)"));
    }
    if filter_len == 0 {
        return Err(invalid("filter_len", "must be positive"));
    }
    let len = len.min(raw.len());
    let (ri, rq) = (raw.i(), raw.q());
    let mut mixed_i = Vec::with_capacity(len);
    let mut mixed_q = Vec::with_capacity(len);
    for n in 0..len {
        let theta = -2.0 * PI * if_freq * n as f64;
        let (s, c) = (libm::sin(theta), libm::cos(theta));
        mixed_i.push(ri[n] * c - rq[n] * s);
        mixed_q.push(ri[n] * s + rq[n] * c);
    }
    let mut out_i = Vec::with_capacity(len);
    let mut out_q = Vec::with_capacity(len);
    for n in 0..len {
        let start = (n + 1).saturating_sub(filter_len);
        let count = (n + 1 - start) as f64;
        out_i.push(mixed_i[start..=n].iter().sum::<f64>() / count);
        out_q.push(mixed_q[start..=n].iter().sum::<f64>() / count);
    }
    Ok(IQTrace::from_parts_unchecked(out_i, out_q))
}

/// Keeps samples before `end_step` and zeroes the rest.
pub fn apply_boxcar_mask(trace: &IQTrace, end_step: usize) -> Result<IQTrace> {
    if end_step == 0 || end_step > trace.len() {
        return Err(invalid("end_step", "must lie in 1..=n_samples"));
    }
    let mut i = trace.i().to_vec();
    let mut q = trace.q().to_vec();
    i[end_step..].fill(0.0);
    q[end_step..].fill(0.0);
    Ok(IQTrace::from_parts_unchecked(i, q))
}

/// Number of windows of size `w` holding at least one sample before `end`.
pub fn active_windows(end: usize, w: usize) -> usize {
    end.div_ceil(w)
}

/// Averages over non-overlapping windows of `w` samples.
///
/// Window `k` covers `[k·w, min((k+1)·w, n))` and is divided by the length of
/// that span, so zeros introduced by a mask count toward the average and
/// only a trailing partial window (when `w` does not divide `n`) is divided
/// by fewer than `w`.
pub fn window_average(trace: &IQTrace, w: usize) -> Result<IQTrace> {
    if w == 0 {
        return Err(invalid("window", "must be positive"));
    }
    let n = trace.len();
    let (i, q) = window_average_prefix(trace.i(), trace.q(), n, w, active_windows(n, w));
    Ok(IQTrace::from_parts_unchecked(i, q))
}

/// Window averages of the first `n_windows` windows of a length-`n` record,
/// reading only samples before `i.len()` (everything later is treated as
/// masked to zero).
pub(crate) fn window_average_prefix(i: &[f64], q: &[f64], n: usize, w: usize, n_windows: usize) -> (Vec<f64>, Vec<f64>) {
    let avail = i.len();
    let mut out_i = Vec::with_capacity(n_windows);
    let mut out_q = Vec::with_capacity(n_windows);
    for k in 0..n_windows {
        let start = k * w;
        let stop = ((k + 1) * w).min(n);
        let span = (stop - start) as f64;
        let read_stop = stop.min(avail);
        let (si, sq) = if start < read_stop {
            (
                i[start..read_stop].iter().sum::<f64>(),
                q[start..read_stop].iter().sum::<f64>(),
            )
        } else {
            (0.0, 0.0)
        };
        out_i.push(si / span);
        out_q.push(sq / span);
    }
    (out_i, out_q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use num_complex::Complex64;

    fn ramp(n: usize) -> IQTrace {
        IQTrace::new((0..n).map(|k| k as f64 + 1.0).collect(), (0..n).map(|k| 0.5 - k as f64).collect()).unwrap()
    }

    #[test]
    fn zero_frequency_is_plain_lowpass() {
        let t = ramp(6);
        let d = demodulate(&t, 0.0, 2).unwrap();
        assert_eq!(d.i()[0], 1.0);
        assert_eq!(d.i()[3], 3.5);
        assert_eq!(d.q()[3], (-1.5 + -2.5) / 2.0);
    }

    #[test]
    fn pure_tone_mixes_to_dc() {
        let f = 0.13;
        let tone: Vec<Complex64> = (0..64)
            .map(|n| Complex64::from_polar(1.0, 2.0 * PI * f * n as f64))
            .collect();
        let d = demodulate(&IQTrace::from_complex(&tone).unwrap(), f, 1).unwrap();
        for z in d.iter() {
            assert!((z.re - 1.0).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn second_tone_obeys_moving_average_sidelobe_bound() {
        let (f1, f2, l) = (0.1, 0.17, 4usize);
        let sig: Vec<Complex64> = (0..256)
            .map(|n| {
                Complex64::from_polar(1.0, 2.0 * PI * f1 * n as f64)
                    + Complex64::from_polar(1.0, 2.0 * PI * f2 * n as f64)
            })
            .collect();
        let d = demodulate(&IQTrace::from_complex(&sig).unwrap(), f1, l).unwrap();
        let df = f2 - f1;
        let bound = (libm::sin(PI * l as f64 * df) / (l as f64 * libm::sin(PI * df))).abs();
        for z in d.iter().skip(l - 1) {
            let residual = (z - Complex64::new(1.0, 0.0)).norm();
            assert!(residual <= bound + 1e-12, "{residual} > {bound}");
        }
    }

    #[test]
    fn mask_keeps_prefix_and_is_idempotent() {
        let t = ramp(500);
        assert_eq!(apply_boxcar_mask(&t, 500).unwrap(), t);
        let m = apply_boxcar_mask(&t, 282).unwrap();
        assert!(m.i()[282..].iter().chain(&m.q()[282..]).all(|&x| x == 0.0));
        assert_eq!(&m.i()[..282], &t.i()[..282]);
        assert_eq!(apply_boxcar_mask(&m, 282).unwrap(), m);
        assert!(apply_boxcar_mask(&t, 0).is_err());
        assert!(apply_boxcar_mask(&t, 501).is_err());
    }

    #[test]
    fn unit_window_is_identity() {
        let t = ramp(9);
        assert_eq!(window_average(&t, 1).unwrap(), t);
    }

    #[test]
    fn masked_window_divides_by_full_width() {
        let t = IQTrace::new(vec![1.0; 500], vec![2.0; 500]).unwrap();
        let avg = window_average(&apply_boxcar_mask(&t, 282).unwrap(), 10).unwrap();
        assert_eq!(avg.len(), 50);
        assert_eq!(active_windows(282, 10), 29);
        assert_eq!(avg.i()[28], 0.2);
        assert_eq!(avg.q()[28], 0.4);
        assert!(avg.i()[29..].iter().all(|&x| x == 0.0));
        assert_eq!(avg.i()[27], 1.0);
    }

    #[test]
    fn trailing_partial_window_uses_actual_length() {
        let t = IQTrace::new(vec![3.0; 5], vec![-1.0; 5]).unwrap();
        let avg = window_average(&t, 2).unwrap();
        assert_eq!(avg.i(), &[3.0, 3.0, 3.0]);
        assert_eq!(avg.q(), &[-1.0, -1.0, -1.0]);
    }
}
