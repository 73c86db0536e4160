//! Orthonormal 8×8 DCT-II, separable, with coefficients emitted in zig-zag order.

use std::sync::OnceLock;

pub const BLOCK: usize = 8;
pub const BANDS: usize = BLOCK * BLOCK;

/// `ZIGZAG[k]` is the row-major index (v * 8 + u) of the k-th zig-zag band.
pub const ZIGZAG: [usize; BANDS] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27, 20,
    13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58, 59,
    52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

/// basis[u][x] = a(u) cos((2x + 1) u pi / 16)
fn basis() -> &'static [[f64; BLOCK]; BLOCK] {
    static BASIS: OnceLock<[[f64; BLOCK]; BLOCK]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; BLOCK]; BLOCK];
        for (u, row) in m.iter_mut().enumerate() {
            let a = if u == 0 {
                (1.0 / BLOCK as f64).sqrt()
            } else {
                (2.0 / BLOCK as f64).sqrt()
            };
            for (x, v) in row.iter_mut().enumerate() {
                *v = a * (((2 * x + 1) * u) as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        m
    })
}

/// Forward transform of a row-major spatial block into zig-zag ordered bands.
pub fn forward(block: &[f64; BANDS], out: &mut [f64]) {
    let c = basis();
    // rows first: tmp[y][u] = sum_x block[y][x] c[u][x]
    let mut tmp = [0.0; BANDS];
    for y in 0..BLOCK {
        for u in 0..BLOCK {
            let mut acc = 0.0;
            for x in 0..BLOCK {
                acc += block[y * BLOCK + x] * c[u][x];
            }
            tmp[y * BLOCK + u] = acc;
        }
    }
    let mut freq = [0.0; BANDS];
    for v in 0..BLOCK {
        for u in 0..BLOCK {
            let mut acc = 0.0;
            for y in 0..BLOCK {
                acc += tmp[y * BLOCK + u] * c[v][y];
            }
            freq[v * BLOCK + u] = acc;
        }
    }
    for (k, &idx) in ZIGZAG.iter().enumerate() {
        out[k] = freq[idx];
    }
}

/// Inverse of [`forward`]: zig-zag ordered bands back to a row-major block.
pub fn inverse(bands: &[f64], out: &mut [f64; BANDS]) {
    let c = basis();
    let mut freq = [0.0; BANDS];
    for (k, &idx) in ZIGZAG.iter().enumerate() {
        freq[idx] = bands[k];
    }
    // columns: tmp[y][u] = sum_v freq[v][u] c[v][y]
    let mut tmp = [0.0; BANDS];
    for y in 0..BLOCK {
        for u in 0..BLOCK {
            let mut acc = 0.0;
            for v in 0..BLOCK {
                acc += freq[v * BLOCK + u] * c[v][y];
            }
            tmp[y * BLOCK + u] = acc;
        }
    }
    for y in 0..BLOCK {
        for x in 0..BLOCK {
            let mut acc = 0.0;
            for u in 0..BLOCK {
                acc += tmp[y * BLOCK + u] * c[u][x];
            }
            out[y * BLOCK + x] = acc;
        }
    }
}
