//! The full chain: hitting set → phased Find-OV → sampling Find-OV → MOM →
//! MOM gadget → symmetrization → exact EMD, decoded back up each layer.

use num_rational::Rational64;

use crate::error::{LayerExt, Result};
use crate::gadgets::{build_mom_gadget, decode_mom, decode_symmetrized, symmetrize, MomSolver};
use crate::matching::emd;
use crate::ov::{hitting_set_phased, FindOvConfig, HsPhaseTrace, HsVerdict, SamplingFindOv};
use crate::vectors::{BinaryVector, PointSetPair};

/// MOM through the gadget, symmetrization and a perfect-matching EMD solve.
#[derive(Clone, Copy, Debug, Default)]
pub struct EmdMomSolver;

impl MomSolver for EmdMomSolver {
    fn solve_mom(&self, pair: &PointSetPair<BinaryVector>) -> Result<Vec<(usize, usize)>> {
        let gadget = build_mom_gadget(pair).layer("mom-gadget")?;
        let sym = symmetrize(&gadget.pair).layer("symmetrize")?;
        let (_, m) = emd(&sym.pair).layer("emd")?;
        let projected = decode_symmetrized(&sym, &m).layer("decode-symmetrized")?.projected;
        let decoded = decode_mom(&gadget, &projected).layer("decode-mom")?;
        Ok(decoded.orthogonal_pairs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub alpha: Rational64,
    pub seed: u64,
    /// Find-OV calls with `|B|` at most this size use the oracle instead of
    /// the EMD chain. Kept small so the chain is what runs.
    pub brute_force_floor: usize,
}

pub const PIPELINE_DEFAULT_FLOOR: usize = 4;

impl PipelineConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            alpha: Rational64::new(1, 2),
            seed,
            brute_force_floor: PIPELINE_DEFAULT_FLOOR,
        }
    }
}

pub fn pipeline_hs_via_emd(
    pair: &PointSetPair<BinaryVector>,
    cfg: &PipelineConfig,
) -> Result<(HsVerdict, HsPhaseTrace)> {
    let find_cfg = FindOvConfig::new(cfg.alpha, cfg.seed)?.with_floor(cfg.brute_force_floor);
    let solver = SamplingFindOv {
        cfg: find_cfg,
        mom: &EmdMomSolver,
    };
    hitting_set_phased(pair, &solver).layer("hitting-set")
}
