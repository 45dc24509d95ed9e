//! Rail localisation: Canny edges, Hough voting, slope-sign grouping and
//! region-of-interest derivation.

mod canny;
mod geometry;
mod hough;

pub use canny::{canny, canny_stages, CannyStages, EdgeMap};
pub use geometry::{
    compute_roi, group_by_slope, refine_line, representative, select_track_lines, LineSegment, Point, SlopeGroups,
    TrackGeometry,
};
pub use hough::{hough_lines, HoughAccumulator, HoughLine};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::{crop, to_grayscale, ImageError, Rect, RgbImage};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("rail not found: no {0} line")]
    RailNotFound(&'static str),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("roi {roi_w}x{roi_h} larger than frame {frame_w}x{frame_h}")]
    RoiTooLarge {
        roi_w: u32,
        roi_h: u32,
        frame_w: u32,
        frame_h: u32,
    },
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Detection parameters; serialized as a flat JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectConfig {
    pub blur_sigma: f64,
    pub blur_radius: u32,
    pub canny_low: f64,
    pub canny_high: f64,
    pub hough_rho_res: f64,
    pub hough_theta_res_deg: f64,
    pub hough_votes: u32,
    pub horizontal_tolerance_deg: f64,
    pub roi_w: u32,
    pub roi_h: u32,
    /// Half-width of the band used to refit each chosen line to its edge
    /// pixels; `0` keeps the raw Hough line.
    pub refine_band: f64,
    /// Restricts detection to this rectangle of the frame.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior_roi: Option<Rect>,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            blur_sigma: 1.4,
            blur_radius: 2,
            canny_low: 50.0,
            canny_high: 150.0,
            hough_rho_res: 1.0,
            hough_theta_res_deg: 1.0,
            hough_votes: 80,
            horizontal_tolerance_deg: 5.0,
            roi_w: 600,
            roi_h: 300,
            refine_band: 4.0,
            prior_roi: None,
        }
    }
}

impl DetectConfig {
    pub fn validate(&self) -> Result<(), DetectError> {
        let bad = |m: &str| Err(DetectError::InvalidParameter(m.to_string()));
        if !(self.blur_sigma > 0.0) || self.blur_radius == 0 {
            return bad("blur_sigma must be > 0 and blur_radius >= 1");
        }
        if !(self.canny_low > 0.0 && self.canny_low < self.canny_high) {
            return bad("canny thresholds need 0 < low < high");
        }
        if !(self.hough_rho_res > 0.0) {
            return bad("hough_rho_res must be > 0");
        }
        if !(self.hough_theta_res_deg > 0.0 && self.hough_theta_res_deg <= 90.0) {
            return bad("hough_theta_res_deg must be in (0, 90]");
        }
        if !(0.0..90.0).contains(&self.horizontal_tolerance_deg) {
            return bad("horizontal_tolerance_deg must be in [0, 90)");
        }
        if self.roi_w == 0 || self.roi_h == 0 {
            return bad("roi dimensions must be positive");
        }
        if !(self.refine_band >= 0.0) {
            return bad("refine_band must be >= 0");
        }
        Ok(())
    }
}

/// Everything produced on the way to a [`TrackGeometry`], for debugging dumps.
#[derive(Debug, Clone)]
pub struct DetectTrace {
    pub edges: EdgeMap,
    pub lines: Vec<HoughLine>,
    pub groups: SlopeGroups,
    /// Offset of the searched window inside the frame.
    pub origin: (u32, u32),
    pub geometry: Result<TrackGeometry, String>,
}

pub fn detect_track(img: &RgbImage, config: &DetectConfig) -> Result<TrackGeometry, DetectError> {
    let (result, _) = run_detection(img, config, false)?;
    result
}

/// Like [`detect_track`], but also hands back the intermediate buffers.
pub fn detect_track_traced(img: &RgbImage, config: &DetectConfig) -> Result<DetectTrace, DetectError> {
    let (result, trace) = run_detection(img, config, true)?;
    let mut trace = trace.expect("trace requested");
    trace.geometry = result.map_err(|e| e.to_string());
    Ok(trace)
}

type DetectionOutcome = (Result<TrackGeometry, DetectError>, Option<DetectTrace>);

fn run_detection(img: &RgbImage, config: &DetectConfig, keep_trace: bool) -> Result<DetectionOutcome, DetectError> {
    config.validate()?;
    let (frame_w, frame_h) = (img.width(), img.height());
    if config.roi_w > frame_w || config.roi_h > frame_h {
        return Err(DetectError::RoiTooLarge {
            roi_w: config.roi_w,
            roi_h: config.roi_h,
            frame_w,
            frame_h,
        });
    }
    let window = config.prior_roi.unwrap_or(img.full_rect());
    let searched = if config.prior_roi.is_some() {
        crop(img, window)?
    } else {
        img.clone()
    };

    let gray = to_grayscale::<f64>(&searched);
    let edges = canny(
        &gray,
        config.canny_low,
        config.canny_high,
        config.blur_sigma,
        config.blur_radius,
    )?;
    let lines = hough_lines(
        &edges,
        config.hough_rho_res,
        config.hough_theta_res_deg.to_radians(),
        config.hough_votes,
    );
    let groups = group_by_slope(&lines, config.horizontal_tolerance_deg.to_radians());

    let result = locate(&edges, &groups, window, config, frame_w, frame_h);
    let trace = keep_trace.then(|| DetectTrace {
        edges,
        lines,
        groups,
        origin: (window.x, window.y),
        geometry: Err(String::new()),
    });
    Ok((result, trace))
}

fn locate(
    edges: &EdgeMap,
    groups: &SlopeGroups,
    window: Rect,
    config: &DetectConfig,
    frame_w: u32,
    frame_h: u32,
) -> Result<TrackGeometry, DetectError> {
    let right = representative(&groups.positive).ok_or(DetectError::RailNotFound("positive-slope"))?;
    let left = representative(&groups.negative).ok_or(DetectError::RailNotFound("negative-slope"))?;
    let (left, right) = if config.refine_band > 0.0 {
        (
            refine_line(edges, &left, config.refine_band, 3),
            refine_line(edges, &right, config.refine_band, 3),
        )
    } else {
        (left, right)
    };
    // refinement may flip a nearly vertical line across theta = 0
    if group_by_slope(&[left], 0.0).negative.is_empty() || group_by_slope(&[right], 0.0).positive.is_empty() {
        return Err(DetectError::NoConvergence("refined rails lost their slope sign".into()));
    }
    // rails are extended across the whole frame, not just the searched window
    let (ox, oy) = (window.x as f64, window.y as f64);
    let to_frame = |l: HoughLine| HoughLine {
        rho: l.rho + ox * l.theta.cos() + oy * l.theta.sin(),
        ..l
    };
    let (left_rail, right_rail, vp) = geometry::rails_from_lines(&to_frame(left), &to_frame(right), frame_w, frame_h)?;
    let roi = compute_roi(&left_rail, &right_rail, config.roi_w, config.roi_h, frame_w, frame_h)?;
    Ok(TrackGeometry {
        left_rail,
        right_rail,
        roi,
        vanishing_point: vp,
    })
}
