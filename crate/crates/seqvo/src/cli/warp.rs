use std::path::{Path, PathBuf};

use seqvo_core::warp_backward;

use crate::error::{self, Error, Result};
use crate::imageio::{encode_mask_png, read_flow, read_image, write_png};

fn default_mask_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}_mask.png"))
}

pub(super) fn run(image: &Path, flow: &Path, out: &Path, mask: Option<&Path>) -> Result<()> {
    let src = read_image(image)?;
    let flow = read_flow(flow)?;
    let warped = warp_backward(&src.image, &flow).map_err(Error::data)?;
    write_png(out, &warped, src.depth)?;
    let mask_png = encode_mask_png(warped.width(), warped.height(), warped.mask())?;
    let mask_path = mask.map_or_else(|| default_mask_path(out), Path::to_path_buf);
    error::write(&mask_path, &mask_png)
}
