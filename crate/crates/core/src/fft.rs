//! Raw multi-dimensional DFT built from rustfft line transforms.
//!
//! `forward` is the unnormalised sum Σ_j f_j e^{−2πi jm/n} along every axis;
//! `inverse` includes the 1/len factor so the pair is an exact inverse.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::exec;
use crate::lattice::Lattice;

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().expect("fft planner poisoned");
    if inverse {
        p.plan_fft_inverse(n)
    } else {
        p.plan_fft_forward(n)
    }
}

fn transform(lat: &Lattice, data: &mut [Complex64], inverse: bool) {
    debug_assert_eq!(data.len(), lat.len());
    let dim = lat.dim();
    for axis in 0..dim {
        let n = lat.points(axis);
        let fft = plan(n, inverse);
        let scratch_len = fft.get_inplace_scratch_len();
        let stride: usize = (axis + 1..dim).map(|a| lat.points(a)).product();
        if stride == 1 {
            exec::for_each_chunk(
                data,
                n,
                || vec![Complex64::default(); scratch_len],
                |s, _, line| fft.process_with_scratch(line, s),
            );
            continue;
        }
        // Strided axis: gather each block's lines into contiguous rows,
        // transform, scatter back.
        let block = n * stride;
        let mut lines = vec![Complex64::default(); block];
        for blk in data.chunks_mut(block) {
            {
                let src: &[Complex64] = blk;
                exec::for_each_chunk(
                    &mut lines,
                    n,
                    || (),
                    |_, j, line| {
                        for (i, x) in line.iter_mut().enumerate() {
                            *x = src[i * stride + j];
                        }
                    },
                );
            }
            exec::for_each_chunk(
                &mut lines,
                n,
                || vec![Complex64::default(); scratch_len],
                |s, _, line| fft.process_with_scratch(line, s),
            );
            let lines_ref: &[Complex64] = &lines;
            exec::for_each_chunk(
                blk,
                stride,
                || (),
                |_, i, row| {
                    for (j, x) in row.iter_mut().enumerate() {
                        *x = lines_ref[j * n + i];
                    }
                },
            );
        }
    }
    if inverse {
        let scale = 1.0 / lat.len() as f64;
        exec::for_each_indexed(data, |_, x| *x *= scale);
    }
}

pub(crate) fn forward(lat: &Lattice, data: &mut [Complex64]) {
    transform(lat, data, false);
}

pub(crate) fn inverse(lat: &Lattice, data: &mut [Complex64]) {
    transform(lat, data, true);
}
