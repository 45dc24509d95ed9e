#![allow(dead_code)]

use std::path::Path;

use railgen::imagecore::write_image;
use railgen::synth::TrackScene;
use railgen::trackdetect::{EdgeMap, HoughAccumulator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Recounts every accumulator cell independently: for cell (k, j), count the
/// edge pixels whose exact rho at theta_k falls within half a bin of the
/// cell's rho.
pub fn brute_force_votes(edges: &EdgeMap, acc: &HoughAccumulator, rho_res: f64, theta_res: f64) -> Vec<u32> {
    let pts: Vec<(f64, f64)> = edges.points().map(|(x, y)| (x as f64, y as f64)).collect();
    let mut out = Vec::with_capacity(acc.n_theta() * acc.n_rho());
    for k in 0..acc.n_theta() {
        let theta = k as f64 * theta_res;
        let (c, s) = (theta.cos(), theta.sin());
        for j in 0..acc.n_rho() {
            let m = acc.rho_of(j) / rho_res;
            let n = pts
                .iter()
                .filter(|&&(x, y)| {
                    let v = (x * c + y * s) / rho_res;
                    // nearest bin, halves rounded away from zero
                    if v >= 0.0 {
                        v >= m - 0.5 && v < m + 0.5
                    } else {
                        v > m - 0.5 && v <= m + 0.5
                    }
                })
                .count();
            out.push(n as u32);
        }
    }
    out
}

pub fn random_edge_map(rng: &mut impl Rng, max_side: u32, max_points: usize) -> EdgeMap {
    let w = rng.random_range(1..=max_side);
    let h = rng.random_range(1..=max_side);
    let n = rng.random_range(0..=max_points);
    EdgeMap::from_points(w, h, (0..n).map(|_| (rng.random_range(0..w), rng.random_range(0..h))))
}

/// Renders `n` noisy random track scenes into `dir` as `frame_NN.png` and
/// returns the scenes in file-name order.
pub fn write_frames(dir: &Path, n: usize, width: u32, height: u32, seed: u64) -> Vec<TrackScene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut scene = TrackScene::random(width, height, &mut rng);
            scene.noise_sigma = 8.0;
            let img = scene.render(seed.wrapping_add(i as u64)).unwrap();
            write_image(&img, dir.join(format!("frame_{i:02}.png"))).unwrap();
            scene
        })
        .collect()
}
