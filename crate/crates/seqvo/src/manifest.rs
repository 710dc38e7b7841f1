//! Sequence manifests: frames, timestamps and flow files of a stereo sequence.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use seqvo_core::consistency::{FlowDirection, FlowKind, FrameFlows};

use crate::error::{self, Error, Result};
use crate::imageio::{self, LoadedImage};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tmp_left: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip_left: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stereo: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tmp_right: Option<String>,
}

impl FlowPaths {
    pub fn get(&self, kind: FlowKind) -> Option<&str> {
        match kind {
            FlowKind::TmpLeft => self.tmp_left.as_deref(),
            FlowKind::SkipLeft => self.skip_left.as_deref(),
            FlowKind::Stereo => self.stereo.as_deref(),
            FlowKind::TmpRight => self.tmp_right.as_deref(),
        }
    }

    pub fn set(&mut self, kind: FlowKind, path: String) {
        let slot = match kind {
            FlowKind::TmpLeft => &mut self.tmp_left,
            FlowKind::SkipLeft => &mut self.skip_left,
            FlowKind::Stereo => &mut self.stereo,
            FlowKind::TmpRight => &mut self.tmp_right,
        };
        *slot = Some(path);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub index: usize,
    /// Seconds.
    pub timestamp: f64,
    pub left: String,
    pub right: String,
    #[serde(default)]
    pub flows: FlowPaths,
}

/// Parsed manifest document. Paths are relative to the manifest's directory
/// unless absolute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    /// Rows removed from the bottom of every image and flow at load time.
    #[serde(default)]
    pub crop_rows: usize,
    #[serde(default)]
    pub flow_direction: FlowDirection,
    pub frames: Vec<FrameEntry>,
}

impl Manifest {
    /// Parses and validates. Frames are reordered by index.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut m: Manifest = serde_json::from_str(text).map_err(|e| format!("malformed manifest: {e}"))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&mut self) -> Result<(), String> {
        if self.schema != SCHEMA_VERSION {
            return Err(format!("unsupported manifest schema {} (expected {SCHEMA_VERSION})", self.schema));
        }
        if self.frames.is_empty() {
            return Err("manifest lists no frames".into());
        }
        self.frames.sort_by_key(|f| f.index);
        for (k, f) in self.frames.iter().enumerate() {
            if f.index != k {
                return Err(format!("frame indices must be contiguous from 0: expected {k}, found {}", f.index));
            }
            if !f.timestamp.is_finite() {
                return Err(format!("frame {k}: non-finite timestamp"));
            }
        }
        if let Some(w) = self.frames.windows(2).find(|w| w[1].timestamp <= w[0].timestamp) {
            return Err(format!("timestamps must be strictly increasing (frame {})", w[1].index));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// A validated manifest bound to the directory its paths resolve against.
#[derive(Clone, Debug)]
pub struct SequenceManifest {
    pub manifest: Manifest,
    pub path: PathBuf,
    base: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl SequenceManifest {
    /// Reads and validates; a malformed document maps to a validation error.
    pub fn load(path: &Path) -> Result<Self> {
        let text = error::read_text(path)?;
        let manifest = Manifest::parse(&text).map_err(|m| Error::invalid(format!("{}: {m}", path.display())))?;
        Ok(Self::new(manifest, path))
    }

    pub fn new(manifest: Manifest, path: &Path) -> Self {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self {
            manifest,
            path: path.to_path_buf(),
            base,
        }
    }

    pub fn len(&self) -> usize {
        self.manifest.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.frames.is_empty()
    }

    pub fn resolve(&self, rel: &str) -> PathBuf {
        self.base.join(rel)
    }

    pub fn flow_path(&self, frame: usize, kind: FlowKind) -> Option<PathBuf> {
        self.manifest.frames[frame].flows.get(kind).map(|p| self.resolve(p))
    }

    pub fn image_path(&self, frame: usize, side: Side) -> PathBuf {
        let f = &self.manifest.frames[frame];
        self.resolve(match side {
            Side::Left => &f.left,
            Side::Right => &f.right,
        })
    }

    /// Checks that frame `frame` declares every flow in `kinds`.
    pub fn require_flows(&self, frame: usize, kinds: &[FlowKind]) -> Result<()> {
        match kinds.iter().find(|&&k| self.manifest.frames[frame].flows.get(k).is_none()) {
            Some(k) => Err(Error::invalid(format!(
                "{}: frame {frame} lists no {k} flow",
                self.path.display()
            ))),
            None => Ok(()),
        }
    }

    /// Reads the requested flows of one frame, cropped.
    pub fn load_flows(&self, frame: usize, kinds: &[FlowKind]) -> Result<FrameFlows> {
        self.require_flows(frame, kinds)?;
        let mut flows = FrameFlows::default();
        for &kind in kinds {
            let path = self.flow_path(frame, kind).expect("checked above");
            let flow = imageio::read_flow(&path)?;
            let flow = flow
                .crop_bottom(self.manifest.crop_rows)
                .map_err(|e| Error::format(&path, e))?;
            flows.set(kind, flow);
        }
        Ok(flows)
    }

    /// Reads one image, cropped.
    pub fn load_image(&self, frame: usize, side: Side) -> Result<LoadedImage> {
        let path = self.image_path(frame, side);
        let mut loaded = imageio::read_image(&path)?;
        loaded.image = loaded
            .image
            .crop_bottom(self.manifest.crop_rows)
            .map_err(|e| Error::format(&path, e))?;
        Ok(loaded)
    }

    /// Every referenced file in frame order: left, right, then flows.
    pub fn referenced_paths(&self) -> Vec<PathBuf> {
        let mut out = Vec::new();
        for k in 0..self.len() {
            out.push(self.image_path(k, Side::Left));
            out.push(self.image_path(k, Side::Right));
            out.extend(FlowKind::ALL.iter().filter_map(|&kind| self.flow_path(k, kind)));
        }
        out
    }

    /// Fails on the first referenced file that does not exist.
    pub fn check_files(&self) -> Result<()> {
        for path in self.referenced_paths() {
            if !path.is_file() {
                return Err(Error::io(&path, std::io::Error::from(std::io::ErrorKind::NotFound)));
            }
        }
        Ok(())
    }
}
