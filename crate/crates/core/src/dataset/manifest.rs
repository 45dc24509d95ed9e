use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinksim::{BreakSpec, KinkSpec, RailSide};
use crate::vegsim::BlobSpec;

pub const MANIFEST_HEADER: [&str; 7] = [
    "file",
    "label",
    "anomaly_type",
    "source_file",
    "seed",
    "augmentations",
    "spec_json",
];

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest i/o at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected manifest header {0:?}")]
    Header(Vec<String>),
    #[error("record {line}: {message}")]
    Record { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Healthy,
    Anomaly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyType {
    None,
    Vegetation,
    SunKink,
    MissingRail,
    BrokenRail,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Healthy => "healthy",
            Label::Anomaly => "anomaly",
        }
    }
}

impl AnomalyType {
    pub fn as_str(self) -> &'static str {
        match self {
            AnomalyType::None => "none",
            AnomalyType::Vegetation => "vegetation",
            AnomalyType::SunKink => "sun_kink",
            AnomalyType::MissingRail => "missing_rail",
            AnomalyType::BrokenRail => "broken_rail",
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "healthy" => Ok(Label::Healthy),
            "anomaly" => Ok(Label::Anomaly),
            _ => Err(format!("unknown label {s:?}")),
        }
    }
}

impl FromStr for AnomalyType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            AnomalyType::None,
            AnomalyType::Vegetation,
            AnomalyType::SunKink,
            AnomalyType::MissingRail,
            AnomalyType::BrokenRail,
        ]
        .into_iter()
        .find(|a| a.as_str() == s)
        .ok_or_else(|| format!("unknown anomaly type {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Augmentation {
    Flip,
    Brightness(i32),
}

impl fmt::Display for Augmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Augmentation::Flip => f.write_str("flip"),
            Augmentation::Brightness(d) => write!(f, "brightness({d:+})"),
        }
    }
}

impl FromStr for Augmentation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "flip" {
            return Ok(Augmentation::Flip);
        }
        s.strip_prefix("brightness(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|d| d.parse::<i32>().ok())
            .map(Augmentation::Brightness)
            .ok_or_else(|| format!("unknown augmentation {s:?}"))
    }
}

/// Parameters of the defect injected into one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalySpec {
    Vegetation(Vec<BlobSpec>),
    SunKink(KinkSpec),
    MissingRail { rail: RailSide },
    BrokenRail(BreakSpec),
}

impl AnomalySpec {
    pub fn anomaly_type(&self) -> AnomalyType {
        match self {
            AnomalySpec::Vegetation(_) => AnomalyType::Vegetation,
            AnomalySpec::SunKink(_) => AnomalyType::SunKink,
            AnomalySpec::MissingRail { .. } => AnomalyType::MissingRail,
            AnomalySpec::BrokenRail(_) => AnomalyType::BrokenRail,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub file: String,
    pub label: Label,
    pub anomaly_type: AnomalyType,
    pub source_file: String,
    pub seed: u64,
    pub augmentations: Vec<Augmentation>,
    pub spec: Option<AnomalySpec>,
}

impl SampleRecord {
    /// healthy ⇔ no anomaly type ⇔ no spec, and the spec matches the type.
    pub fn is_consistent(&self) -> bool {
        match (&self.label, &self.spec) {
            (Label::Healthy, None) => self.anomaly_type == AnomalyType::None,
            (Label::Anomaly, Some(spec)) => spec.anomaly_type() == self.anomaly_type,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub records: Vec<SampleRecord>,
}

impl Manifest {
    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, ManifestError> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(MANIFEST_HEADER)?;
        for r in &self.records {
            let augmentations = r
                .augmentations
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(";");
            let spec_json = match &r.spec {
                Some(spec) => serde_json::to_string(spec).map_err(|e| ManifestError::Record {
                    line: 0,
                    message: e.to_string(),
                })?,
                None => String::new(),
            };
            let seed = r.seed.to_string();
            w.write_record([
                r.file.as_str(),
                r.label.as_str(),
                r.anomaly_type.as_str(),
                r.source_file.as_str(),
                seed.as_str(),
                augmentations.as_str(),
                spec_json.as_str(),
            ])?;
        }
        w.into_inner().map_err(|e| ManifestError::Io {
            path: "<buffer>".into(),
            source: e.into_error(),
        })
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self, ManifestError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
        let mut rows = rdr.records();
        let header = rows
            .next()
            .transpose()?
            .map(|h| h.iter().map(str::to_string).collect::<Vec<_>>());
        match header {
            Some(h) if h == MANIFEST_HEADER => {}
            other => return Err(ManifestError::Header(other.unwrap_or_default())),
        }
        let mut records = Vec::new();
        for (i, row) in rows.enumerate() {
            let line = i + 2;
            let row = row?;
            let err = |message: String| ManifestError::Record { line, message };
            if row.len() != MANIFEST_HEADER.len() {
                return Err(err(format!("expected 7 fields, found {}", row.len())));
            }
            let augmentations = if row[5].is_empty() {
                Vec::new()
            } else {
                row[5]
                    .split(';')
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .map_err(err)?
            };
            let spec = if row[6].is_empty() {
                None
            } else {
                Some(serde_json::from_str(&row[6]).map_err(|e| err(e.to_string()))?)
            };
            records.push(SampleRecord {
                file: row[0].to_string(),
                label: row[1].parse().map_err(err)?,
                anomaly_type: row[2].parse().map_err(err)?,
                source_file: row[3].to_string(),
                seed: row[4]
                    .parse()
                    .map_err(|e: std::num::ParseIntError| err(e.to_string()))?,
                augmentations,
                spec,
            });
        }
        Ok(Manifest { records })
    }
}

pub fn write_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<(), ManifestError> {
    let path = path.as_ref();
    let bytes = manifest.to_csv()?;
    let io = |source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(&bytes).map_err(io)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest, ManifestError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Manifest::from_csv(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinksim::KinkDirection;
    use crate::trackdetect::Point;
    use proptest::prelude::*;

    fn sample() -> Manifest {
        Manifest {
            records: vec![
                SampleRecord {
                    file: "00000_healthy.png".into(),
                    label: Label::Healthy,
                    anomaly_type: AnomalyType::None,
                    source_file: "a.png".into(),
                    seed: 17,
                    augmentations: vec![Augmentation::Flip, Augmentation::Brightness(-12)],
                    spec: None,
                },
                SampleRecord {
                    file: "00001_sun_kink.png".into(),
                    label: Label::Anomaly,
                    anomaly_type: AnomalyType::SunKink,
                    source_file: "a.png".into(),
                    seed: u64::MAX,
                    augmentations: vec![Augmentation::Brightness(3)],
                    spec: Some(AnomalySpec::SunKink(KinkSpec {
                        t0: 0.2,
                        t1: 0.45,
                        amplitude: 17.25,
                        direction: KinkDirection::Left,
                        rail: RailSide::RightRail,
                    })),
                },
            ],
        }
    }

    #[test]
    fn round_trip() {
        let m = sample();
        let bytes = m.to_csv().unwrap();
        assert_eq!(Manifest::from_csv(&bytes).unwrap(), m);
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("file,label,anomaly_type,source_file,seed,augmentations,spec_json\n"));
        assert!(!text.contains('\r'));
        assert!(text.contains("flip;brightness(-12)"));
    }

    #[test]
    fn empty_is_header_only() {
        let bytes = Manifest::default().to_csv().unwrap();
        assert_eq!(
            bytes,
            b"file,label,anomaly_type,source_file,seed,augmentations,spec_json\n"
        );
        assert_eq!(Manifest::from_csv(&bytes).unwrap(), Manifest::default());
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(matches!(Manifest::from_csv(b"a,b\n"), Err(ManifestError::Header(_))));
        assert!(matches!(Manifest::from_csv(b""), Err(ManifestError::Header(_))));
    }

    #[test]
    fn consistency_rule() {
        let m = sample();
        assert!(m.records.iter().all(SampleRecord::is_consistent));
        let mut bad = m.records[0].clone();
        bad.anomaly_type = AnomalyType::Vegetation;
        assert!(!bad.is_consistent());
    }

    proptest! {
        // specs carry floats and free-form names; quoting must survive commas,
        // quotes and newlines in any field
        #[test]
        fn fuzz_round_trip(
            name in "[a-z,\"\n ]{1,12}",
            seed in any::<u64>(),
            delta in -255i32..=255,
            blobs in prop::collection::vec((0.0f64..600.0, 0.0f64..300.0, 0.1f64..20.0, 0u32..2000, any::<u64>()), 0..5),
        ) {
            let spec = AnomalySpec::Vegetation(blobs.iter().map(|&(x, y, s, n, h)| BlobSpec {
                center: Point::new(x, y), sigma_x: s, sigma_y: s * 0.5, n_pixels: n, hue_seed: h,
            }).collect());
            let m = Manifest { records: vec![SampleRecord {
                file: format!("{name}.png"),
                label: Label::Anomaly,
                anomaly_type: AnomalyType::Vegetation,
                source_file: name.clone(),
                seed,
                augmentations: vec![Augmentation::Brightness(delta)],
                spec: Some(spec),
            }]};
            prop_assert_eq!(Manifest::from_csv(&m.to_csv().unwrap()).unwrap(), m);
        }
    }
}
