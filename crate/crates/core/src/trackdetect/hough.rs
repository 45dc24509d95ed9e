use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::canny::EdgeMap;

/// A line in normal form: `x·cos(theta) + y·sin(theta) = rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoughLine {
    pub rho: f64,
    /// Normal angle in `[0, π)`.
    pub theta: f64,
    pub votes: u32,
}

impl HoughLine {
    /// Image-coordinate slope `dy/dx` of the line direction (y grows downward).
    /// Infinite for vertical lines.
    pub fn slope(&self) -> f64 {
        -self.theta.cos() / self.theta.sin()
    }

    /// Signed distance of `(x, y)` from the line.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        x * self.theta.cos() + y * self.theta.sin() - self.rho
    }
}

/// `(rho, theta)` vote accumulator.
///
/// Theta bins are `k·theta_res` for every `k` with `k·theta_res < π`. Rho bins
/// are centered on multiples of `rho_res` and cover `[-D, D]`,
/// `D = ⌈√(w²+h²)⌉`, symmetrically about zero; a pixel votes for the bin whose
/// center is nearest its exact rho.
#[derive(Debug, Clone)]
pub struct HoughAccumulator {
    rho_res: f64,
    theta_res: f64,
    max_rho: f64,
    /// Index of the rho = 0 bin.
    rho_center: usize,
    n_theta: usize,
    n_rho: usize,
    votes: Vec<u32>,
}

impl HoughAccumulator {
    pub fn new(width: u32, height: u32, rho_res: f64, theta_res: f64) -> Self {
        assert!(rho_res > 0.0, "rho_res must be positive");
        assert!(
            theta_res > 0.0 && theta_res <= PI / 2.0,
            "theta_res must be in (0, pi/2]"
        );
        let max_rho = ((width as f64).powi(2) + (height as f64).powi(2)).sqrt().ceil();
        let n_theta = theta_bin_count(theta_res);
        let rho_center = (max_rho / rho_res).ceil() as usize;
        let n_rho = 2 * rho_center + 1;
        HoughAccumulator {
            rho_res,
            theta_res,
            max_rho,
            rho_center,
            n_theta,
            n_rho,
            votes: vec![0; n_theta * n_rho],
        }
    }

    pub fn accumulate(edges: &EdgeMap, rho_res: f64, theta_res: f64) -> Self {
        let mut acc = Self::new(edges.width(), edges.height(), rho_res, theta_res);
        let trig: Vec<(f64, f64)> = (0..acc.n_theta).map(|k| acc.theta_trig(k)).collect();
        for (x, y) in edges.points() {
            let (x, y) = (x as f64, y as f64);
            for (k, &(c, s)) in trig.iter().enumerate() {
                if let Some(j) = acc.rho_bin(x * c + y * s) {
                    acc.votes[k * acc.n_rho + j] += 1;
                }
            }
        }
        acc
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_rho(&self) -> usize {
        self.n_rho
    }

    pub fn max_rho(&self) -> f64 {
        self.max_rho
    }

    pub fn theta_of(&self, k: usize) -> f64 {
        k as f64 * self.theta_res
    }

    pub fn rho_of(&self, j: usize) -> f64 {
        (j as f64 - self.rho_center as f64) * self.rho_res
    }

    /// `(cos θ_k, sin θ_k)`.
    pub fn theta_trig(&self, k: usize) -> (f64, f64) {
        let t = self.theta_of(k);
        (t.cos(), t.sin())
    }

    /// Nearest bin index for an exact rho value, if it falls inside the range.
    pub fn rho_bin(&self, rho: f64) -> Option<usize> {
        let j = (rho / self.rho_res).round() + self.rho_center as f64;
        if j >= 0.0 && (j as usize) < self.n_rho {
            Some(j as usize)
        } else {
            None
        }
    }

    pub fn votes(&self, theta_bin: usize, rho_bin: usize) -> u32 {
        self.votes[theta_bin * self.n_rho + rho_bin]
    }

    /// Maps unwrapped theta/rho indices back onto a cell. Theta is periodic
    /// with period π, and crossing the seam negates rho.
    fn cell(&self, vk: i64, vj: i64) -> Option<(usize, usize)> {
        let n = self.n_theta as i64;
        let k = vk.rem_euclid(n);
        let flips = vk.div_euclid(n);
        let j = if flips % 2 == 0 {
            vj
        } else {
            2 * self.rho_center as i64 - vj
        };
        (j >= 0 && j < self.n_rho as i64).then_some((k as usize, j as usize))
    }

    /// Local maxima of the vote surface with at least `threshold` votes, most
    /// voted first.
    ///
    /// A connected run of equal-vote cells (8-neighbourhood, theta wrapping
    /// around with mirrored rho) counts as one maximum when no cell of the run
    /// touches a higher cell. It is reported at the member cell nearest the
    /// run's centroid; remaining ties go to the smaller theta, then the
    /// smaller rho.
    pub fn peaks(&self, threshold: u32) -> Vec<HoughLine> {
        let mut visited = vec![false; self.votes.len()];
        let mut peaks = Vec::new();
        let mut stack = Vec::new();
        let mut members: Vec<(i64, i64)> = Vec::new();
        for k in 0..self.n_theta {
            for j in 0..self.n_rho {
                let v = self.votes(k, j);
                if v == 0 || v < threshold || visited[k * self.n_rho + j] {
                    continue;
                }
                visited[k * self.n_rho + j] = true;
                stack.clear();
                members.clear();
                stack.push((k as i64, j as i64));
                let mut dominated = false;
                while let Some((vk, vj)) = stack.pop() {
                    members.push((vk, vj));
                    for dk in -1..=1 {
                        for dj in -1..=1 {
                            if dk == 0 && dj == 0 {
                                continue;
                            }
                            let Some((nk, nj)) = self.cell(vk + dk, vj + dj) else {
                                continue;
                            };
                            let nv = self.votes(nk, nj);
                            if nv > v {
                                dominated = true;
                            } else if nv == v && !visited[nk * self.n_rho + nj] {
                                visited[nk * self.n_rho + nj] = true;
                                stack.push((vk + dk, vj + dj));
                            }
                        }
                    }
                }
                if !dominated {
                    let (k, j) = self.plateau_center(&members);
                    peaks.push((k, j, v));
                }
            }
        }
        peaks.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
        peaks
            .into_iter()
            .map(|(k, j, v)| HoughLine {
                rho: self.rho_of(j),
                theta: self.theta_of(k),
                votes: v,
            })
            .collect()
    }

    fn plateau_center(&self, members: &[(i64, i64)]) -> (usize, usize) {
        let n = members.len() as f64;
        let ck = members.iter().map(|m| m.0 as f64).sum::<f64>() / n;
        let cj = members.iter().map(|m| m.1 as f64).sum::<f64>() / n;
        members
            .iter()
            .map(|&(vk, vj)| {
                let d = (vk as f64 - ck).powi(2) + (vj as f64 - cj).powi(2);
                (d, self.cell(vk, vj).expect("member cells are in range"))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, c)| c)
            .expect("plateau is non-empty")
    }
}

pub(crate) fn theta_bin_count(theta_res: f64) -> usize {
    // bins k·res for k·res < π, guarding against k·res landing a rounding error short of π
    let n = (PI / theta_res).ceil() as usize;
    if n > 1 && ((n - 1) as f64 * theta_res) >= PI - 1e-9 {
        n - 1
    } else {
        n.max(1)
    }
}

pub fn hough_lines(edges: &EdgeMap, rho_res: f64, theta_res: f64, vote_threshold: u32) -> Vec<HoughLine> {
    HoughAccumulator::accumulate(edges, rho_res, theta_res).peaks(vote_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEG: f64 = PI / 180.0;

    #[test]
    fn bin_counts() {
        assert_eq!(theta_bin_count(DEG), 180);
        assert_eq!(theta_bin_count(PI / 2.0), 2);
        assert_eq!(theta_bin_count(0.7 * DEG), 258);
    }

    #[test]
    fn empty_map_no_lines() {
        assert!(hough_lines(&EdgeMap::empty(10, 10), 1.0, DEG, 1).is_empty());
    }

    #[test]
    fn horizontal_row_peak() {
        let edges = EdgeMap::from_points(10, 10, (0..10).map(|x| (x, 5)));
        let lines = hough_lines(&edges, 1.0, DEG, 5);
        let top = lines[0];
        assert_eq!(top.votes, 10);
        assert!((top.theta - 90.0 * DEG).abs() < 1e-12);
        assert!((top.rho - 5.0).abs() < 1e-12);
    }

    #[test]
    fn full_plateau_reports_one_peak() {
        // a pixel at the origin votes rho = 0 in every theta bin
        let edges = EdgeMap::from_points(5, 5, [(0, 0)]);
        let acc = HoughAccumulator::accumulate(&edges, 1.0, DEG);
        let peaks = acc.peaks(1);
        assert_eq!(peaks.len(), 1);
        assert_eq!(peaks[0].rho, 0.0);
        assert_eq!(peaks, acc.peaks(1));
    }

    #[test]
    fn slope_sign_convention() {
        // theta = 135° normal -> direction (sin, -cos) = (0.707, 0.707): y grows with x
        let l = HoughLine {
            rho: 0.0,
            theta: 135.0 * DEG,
            votes: 1,
        };
        assert!((l.slope() - 1.0).abs() < 1e-12);
        let h = HoughLine {
            rho: 0.0,
            theta: 90.0 * DEG,
            votes: 1,
        };
        assert!(h.slope().abs() < 1e-12);
    }
}

#[cfg(test)]
mod wrap_tests {
    use super::*;

    #[test]
    fn vertical_line_is_one_peak_across_the_seam() {
        // x = 10 votes at theta ≈ 0 with rho 10 and at theta ≈ π with rho -10
        let edges = EdgeMap::from_points(32, 32, (0..20).map(|y| (10, y)));
        let peaks = hough_lines(&edges, 1.0, PI / 180.0, 15);
        assert_eq!(peaks.len(), 1, "{peaks:?}");
        assert_eq!(peaks[0].votes, 20);
        assert_eq!(peaks[0].theta, 0.0);
        assert_eq!(peaks[0].rho, 10.0);
    }
}
