//! Binary checkpoints of a run: operator string, RNG position and accumulators.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tfim_core::SubsystemGeometry;

use crate::binning::Binner;
use crate::chain::{LoopStats, Representation, SseChain, SseModel};
use crate::error::{Result, SseError};
use crate::run::{SseParams, SseRun};
use crate::string::{Op, OperatorString};

pub const MAGIC: [u8; 8] = *b"TFIMSSE\0";
pub const VERSION: u32 = 1;

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, x: u8) {
        self.0.push(x);
    }
    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn usize(&mut self, x: usize) {
        self.u64(x as u64);
    }
    fn f64(&mut self, x: f64) {
        self.u64(x.to_bits());
    }
    fn f64s(&mut self, xs: &[f64]) {
        self.usize(xs.len());
        for &x in xs {
            self.f64(x);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| SseError::Checkpoint("truncated file".into()))?;
        let out = &self.buf[self.at..end];
        self.at = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize> {
        Ok(self.u64()? as usize)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.usize()?;
        if n > self.buf.len() / 8 {
            return Err(SseError::Checkpoint("corrupt length".into()));
        }
        (0..n).map(|_| self.f64()).collect()
    }
}

fn encode_op(w: &mut Writer, op: Op) {
    let (tag, idx) = match op {
        Op::Identity => (0, 0),
        Op::SiteDiag(i) => (1, i),
        Op::SiteFlip(i) => (2, i),
        Op::BondDiag(b) => (3, b),
        Op::BondFlip(b) => (4, b),
    };
    w.u8(tag);
    w.u32(idx);
}

fn decode_op(r: &mut Reader) -> Result<Op> {
    let tag = r.u8()?;
    let idx = r.u32()?;
    Ok(match tag {
        0 => Op::Identity,
        1 => Op::SiteDiag(idx),
        2 => Op::SiteFlip(idx),
        3 => Op::BondDiag(idx),
        4 => Op::BondFlip(idx),
        t => return Err(SseError::Checkpoint(format!("unknown operator tag {t}"))),
    })
}

fn header(w: &mut Writer, model: &SseModel, params: &SseParams, subsystems: &[SubsystemGeometry]) {
    w.u8(match model.representation {
        Representation::XBasis => 0,
        Representation::ZBasis => 1,
    });
    w.usize(model.n_sites());
    w.usize(model.bonds().len());
    w.f64(model.lattice.bond_coupling);
    w.f64(model.field);
    w.f64(model.beta);
    w.usize(params.thermalization);
    w.usize(params.sweeps);
    w.usize(params.bins);
    w.u64(params.seed);
    w.usize(subsystems.len());
    for g in subsystems {
        w.usize(g.sites.len());
        for &s in &g.sites {
            w.usize(s);
        }
    }
}

impl SseRun {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.0.extend_from_slice(&MAGIC);
        w.u32(VERSION);
        header(&mut w, &self.chain.model, &self.params, &self.subsystems);
        w.usize(self.thermalized);
        w.usize(self.measured);
        w.usize(self.max_n);
        w.u64(self.therm_legs);
        w.u64(self.therm_loops);
        w.u64(self.therm_n);
        let c = &self.chain;
        w.usize(c.loops_per_sweep);
        w.u64(c.stats.loops);
        w.u64(c.stats.legs);
        w.u64(c.stats.aborted);
        w.usize(c.string.cutoff());
        w.usize(c.string.n_ops);
        for &op in &c.string.ops {
            encode_op(&mut w, op);
        }
        for &s in &c.string.state {
            w.u8(s as u8);
        }
        w.0.extend_from_slice(&c.rng.get_seed());
        w.u64(c.rng.get_stream());
        let pos = c.rng.get_word_pos();
        w.u64(pos as u64);
        w.u64((pos >> 64) as u64);
        let b = &self.binner;
        w.usize(b.channels);
        w.usize(b.fine_size);
        w.f64s(&b.open);
        w.usize(b.filled);
        for ch in &b.fine {
            w.f64s(ch);
        }
        w.f64s(&b.sum);
        w.f64s(&b.sum_sq);
        w.usize(b.samples);
        w.0
    }

    /// Restores a run written by [`SseRun::to_bytes`]; `model`, `params` and
    /// `subsystems` must describe the same simulation.
    pub fn from_bytes(bytes: &[u8], model: SseModel, params: SseParams, subsystems: Vec<SubsystemGeometry>) -> Result<Self> {
        let mut r = Reader { buf: bytes, at: 0 };
        if r.take(8)? != MAGIC {
            return Err(SseError::Checkpoint("not a checkpoint file".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(SseError::Checkpoint(format!("unsupported version {version}")));
        }
        let mut expect = Writer::default();
        header(&mut expect, &model, &params, &subsystems);
        if r.take(expect.0.len())? != expect.0.as_slice() {
            return Err(SseError::Checkpoint("checkpoint belongs to a different simulation".into()));
        }
        let mut run = SseRun::new(model, params, subsystems)?;
        run.thermalized = r.usize()?;
        run.measured = r.usize()?;
        run.max_n = r.usize()?;
        run.therm_legs = r.u64()?;
        run.therm_loops = r.u64()?;
        run.therm_n = r.u64()?;
        let loops_per_sweep = r.usize()?;
        let stats = LoopStats { loops: r.u64()?, legs: r.u64()?, aborted: r.u64()? };
        let cutoff = r.usize()?;
        let n_ops = r.usize()?;
        if cutoff > bytes.len() {
            return Err(SseError::Checkpoint("corrupt cutoff".into()));
        }
        let ops = (0..cutoff).map(|_| decode_op(&mut r)).collect::<Result<Vec<_>>>()?;
        let n_sites = run.chain.model.n_sites();
        let state = (0..n_sites).map(|_| r.u8().map(|b| b != 0)).collect::<Result<Vec<_>>>()?;
        let seed: [u8; 32] = r.take(32)?.try_into().unwrap();
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(r.u64()?);
        let lo = r.u64()? as u128;
        let hi = r.u64()? as u128;
        rng.set_word_pos(lo | (hi << 64));
        let string = OperatorString { ops, n_ops, state };
        let model = run.chain.model.clone();
        let mut chain = SseChain::from_parts(model, string, rng, loops_per_sweep);
        chain.stats = stats;
        if !chain.check_invariants() {
            return Err(SseError::Checkpoint("operator string fails its invariants".into()));
        }
        run.chain = chain;
        let channels = r.usize()?;
        let fine_size = r.usize()?;
        if channels != run.binner.channels || fine_size != run.binner.fine_size {
            return Err(SseError::Checkpoint("accumulator layout mismatch".into()));
        }
        let mut b = Binner::new(channels, fine_size);
        b.open = r.f64s()?;
        b.filled = r.usize()?;
        b.fine = (0..channels).map(|_| r.f64s()).collect::<Result<_>>()?;
        b.sum = r.f64s()?;
        b.sum_sq = r.f64s()?;
        b.samples = r.usize()?;
        if b.open.len() != channels || b.sum.len() != channels || b.sum_sq.len() != channels {
            return Err(SseError::Checkpoint("accumulator layout mismatch".into()));
        }
        run.binner = b;
        if r.at != bytes.len() {
            return Err(SseError::Checkpoint("trailing bytes".into()));
        }
        Ok(run)
    }

    /// Writes the checkpoint atomically.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.to_bytes())?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path, model: SseModel, params: SseParams, subsystems: Vec<SubsystemGeometry>) -> Result<Self> {
        let bytes = fs::read(path)?;
        Self::from_bytes(&bytes, model, params, subsystems)
    }
}
