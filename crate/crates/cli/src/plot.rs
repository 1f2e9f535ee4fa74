//! Plot-ready raster exports in binary PPM (P6).
//!
//! Per-slice overlays show the slice intensities in greyscale with the air
//! surface drawn in red and the reconstructed boundary in green; the depth
//! map colors each (slice, column) cell by its boundary row.

use icebound_core::{Surface, TopoSequence};

fn ppm(width: usize, height: usize, rgb: Vec<u8>) -> Vec<u8> {
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend(rgb);
    out
}

/// Five-stop linear color ramp over [0, 1], dark blue to bright yellow.
fn colormap(v: f64) -> [u8; 3] {
    const STOPS: [[f64; 3]; 5] = [
        [13.0, 8.0, 135.0],
        [126.0, 3.0, 168.0],
        [204.0, 71.0, 120.0],
        [248.0, 149.0, 64.0],
        [240.0, 249.0, 33.0],
    ];
    let v = v.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let k = (v.floor() as usize).min(STOPS.len() - 2);
    let t = v - k as f64;
    let mut rgb = [0u8; 3];
    for (c, slot) in rgb.iter_mut().enumerate() {
        *slot = (STOPS[k][c] + t * (STOPS[k + 1][c] - STOPS[k][c])).round() as u8;
    }
    rgb
}

/// Depth map of the whole surface: `phi` wide, `l` tall, color by row label.
pub fn depth_map_ppm(surface: &Surface, rho: usize) -> Vec<u8> {
    let (l, phi) = surface.dims();
    let denom = (rho.max(2) - 1) as f64;
    let mut rgb = Vec::with_capacity(l * phi * 3);
    for i in 0..l {
        for j in 0..phi {
            rgb.extend(colormap(surface.label(i, j) as f64 / denom));
        }
    }
    ppm(phi, l, rgb)
}

/// One slice as greyscale with the air surface (red) and the reconstructed
/// boundary (green) overlaid: `phi` wide, `rho` tall.
pub fn slice_overlay_ppm(seq: &TopoSequence, surface: &Surface, slice: usize) -> Vec<u8> {
    let (_, phi, rho) = seq.dims();
    let mut lo = f32::INFINITY;
    let mut hi = f32::NEG_INFINITY;
    for j in 0..phi {
        for &v in seq.column(slice, j) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let span = if hi > lo { (hi - lo) as f64 } else { 1.0 };
    let mut rgb = vec![0u8; phi * rho * 3];
    for j in 0..phi {
        for r in 0..rho {
            let g = (((seq.intensity_at(slice, j, r) - lo) as f64 / span) * 255.0).round() as u8;
            let px = (r * phi + j) * 3;
            rgb[px] = g;
            rgb[px + 1] = g;
            rgb[px + 2] = g;
        }
        let air = seq.air_at(slice, j);
        let px = (air * phi + j) * 3;
        rgb[px] = 255;
        rgb[px + 1] = 0;
        rgb[px + 2] = 0;
        let s = surface.label(slice, j);
        let px = (s * phi + j) * 3;
        rgb[px] = 0;
        rgb[px + 1] = 255;
        rgb[px + 2] = 0;
    }
    ppm(phi, rho, rgb)
}
