use std::path::{Path, PathBuf};

use clap::Args;
use seqvo_core::consistency::{
    adversarial_loss, cycle_loss, stereo_loss, temporal_loss, total_loss, FlowDirection, LossTerms, LossWeights, ScoreMap,
};
use seqvo_core::Image;

use super::{emit, GlobalArgs};
use crate::error::{self, Error, Result};
use crate::imageio::{read_flow, read_image};
use crate::report::{loss_csv, loss_json, LossReport, OutputFormat, Provenance};

#[derive(Debug, Args)]
pub struct LossArgs {
    /// Input image of the cycle term.
    #[arg(long)]
    x: Option<PathBuf>,
    /// Its reconstruction after a round trip through both generators.
    #[arg(long)]
    x_recon: Option<PathBuf>,
    #[arg(long)]
    prev: Option<PathBuf>,
    #[arg(long)]
    curr: Option<PathBuf>,
    /// Temporal flow between `--prev` and `--curr`.
    #[arg(long)]
    tmp_flow: Option<PathBuf>,
    #[arg(long)]
    left: Option<PathBuf>,
    #[arg(long)]
    right: Option<PathBuf>,
    /// Flow between the right and left views.
    #[arg(long)]
    stereo_flow: Option<PathBuf>,
    /// Discriminator scores on generated images: whitespace-separated rows.
    #[arg(long)]
    fake: Option<PathBuf>,
    /// Discriminator scores on real images.
    #[arg(long)]
    real: Option<PathBuf>,
    /// SSIM share of the image-consistency measure.
    #[arg(long, default_value_t = 0.8)]
    alpha: f64,
    /// Term weights `adv,cy,tmp,st`.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "1,10,3,3")]
    weights: Vec<f64>,
    /// Report path; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

pub fn parse_scores(text: &str) -> Result<ScoreMap, String> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| format!("invalid score {v:?}")))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err("score rows differ in length".into());
    }
    ScoreMap::new(width, rows.len(), rows.concat()).map_err(|e| e.to_string())
}

struct Inputs<'a> {
    provenance: &'a mut Provenance,
}

impl Inputs<'_> {
    fn bytes(&mut self, path: &Path) -> Result<Vec<u8>> {
        let b = error::read(path)?;
        self.provenance.input_bytes(path, &b);
        Ok(b)
    }

    fn image(&mut self, path: &Path) -> Result<Image> {
        self.provenance.input(path)?;
        Ok(read_image(path)?.image)
    }

    fn scores(&mut self, path: &Path) -> Result<ScoreMap> {
        let b = self.bytes(path)?;
        let text = String::from_utf8(b).map_err(|_| Error::format(path, "not UTF-8 text"))?;
        parse_scores(&text).map_err(|m| Error::format(path, m))
    }
}

/// All of a term's inputs, none of them, or a usage error naming the gap.
fn group<'a, const N: usize>(term: &str, items: [(&str, &'a Option<PathBuf>); N]) -> Result<Option<[&'a Path; N]>> {
    let present = items.iter().filter(|(_, p)| p.is_some()).count();
    if present == 0 {
        return Ok(None);
    }
    if present < N {
        let names: Vec<String> = items.iter().map(|(n, _)| format!("--{n}")).collect();
        return Err(Error::invalid(format!("the {term} term needs {}", names.join(", "))));
    }
    Ok(Some(items.map(|(_, p)| p.as_deref().expect("all present"))))
}

pub(super) fn run(global: &GlobalArgs, a: &LossArgs) -> Result<()> {
    let [adv, cy, tmp, st] = a.weights[..] else {
        return Err(Error::invalid("--weights takes four values: adv,cy,tmp,st"));
    };
    let weights = LossWeights { adv, cy, tmp, st, alpha: a.alpha };
    weights.validate().map_err(Error::invalid)?;
    let direction = global.flow_direction.map_or(FlowDirection::Source, Into::into);

    let adv_in = group("adversarial", [("fake", &a.fake), ("real", &a.real)])?;
    let cy_in = group("cycle", [("x", &a.x), ("x-recon", &a.x_recon)])?;
    let tmp_in = group("temporal", [("prev", &a.prev), ("curr", &a.curr), ("tmp-flow", &a.tmp_flow)])?;
    let st_in = group("stereo", [("left", &a.left), ("right", &a.right), ("stereo-flow", &a.stereo_flow)])?;
    if adv_in.is_none() && cy_in.is_none() && tmp_in.is_none() && st_in.is_none() {
        return Err(Error::invalid("no computable loss term: supply the inputs of at least one term"));
    }

    let mut provenance = Provenance::new("loss");
    let mut inputs = Inputs { provenance: &mut provenance };
    let compute = |what: &str, r: seqvo_core::Result<f64>| r.map_err(|e| Error::data(format!("{what} term: {e}")));

    let l_adv = match adv_in {
        Some([fake, real]) => {
            let (f, r) = (inputs.scores(fake)?, inputs.scores(real)?);
            Some(compute("adversarial", adversarial_loss(&f, &r).map(|l| l.total))?)
        }
        None => None,
    };
    let l_cy = match cy_in {
        Some([x, xr]) => {
            let (x, xr) = (inputs.image(x)?, inputs.image(xr)?);
            Some(compute("cycle", cycle_loss(&x, &xr, a.alpha))?)
        }
        None => None,
    };
    let l_tmp = match tmp_in {
        Some([prev, curr, flow]) => {
            let (prev, curr) = (inputs.image(prev)?, inputs.image(curr)?);
            inputs.provenance.input(flow)?;
            let flow = read_flow(flow)?;
            Some(compute(
                "temporal",
                match direction {
                    FlowDirection::Target => temporal_loss(&prev, &curr, &flow, a.alpha),
                    FlowDirection::Source => temporal_loss(&curr, &prev, &flow, a.alpha),
                },
            )?)
        }
        None => None,
    };
    let l_st = match st_in {
        Some([left, right, flow]) => {
            let (left, right) = (inputs.image(left)?, inputs.image(right)?);
            inputs.provenance.input(flow)?;
            let flow = read_flow(flow)?;
            Some(compute(
                "stereo",
                match direction {
                    FlowDirection::Target => stereo_loss(&right, &left, &flow, a.alpha),
                    FlowDirection::Source => stereo_loss(&left, &right, &flow, a.alpha),
                },
            )?)
        }
        None => None,
    };

    let terms = LossTerms {
        adv: l_adv.unwrap_or(0.0),
        cy: l_cy.unwrap_or(0.0),
        tmp: l_tmp.unwrap_or(0.0),
        st: l_st.unwrap_or(0.0),
    };
    let report = LossReport {
        l_adv,
        l_cy,
        l_tmp,
        l_st,
        total: total_loss(&terms, &weights),
        weights,
    };
    provenance
        .flag("flow_direction", direction.as_str())
        .flag("alpha", a.alpha)
        .flag("weights", format!("{adv},{cy},{tmp},{st}"));
    let text = match global.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => loss_json(&report, &provenance),
        OutputFormat::Csv => loss_csv(&report, &provenance),
    };
    emit(&text, a.out.as_deref())
}
