//! Binary and CSV containers for shot sets, matched-filter weights and
//! trained discriminators.
//!
//! Binary shot sets are little-endian:
//!
//! ```text
//! "NGRQ" u32 version=1 u32 layout u32 n_qubits u32 n_classes
//! u32 n_channels u32 n_samples u64 n_shots
//! per shot: u64 label, then per channel (i0, q0, i1, q1, ...) as f64
//! ```
//!
//! Metadata follows the shots as an optional trailer: `u32 n_entries`, then
//! length-prefixed UTF-8 key/value pairs, then `u64 trailer_len` and the
//! tag `"META"`. Readers locate the trailer from the end of the file, so a
//! short shot payload is reported as a length mismatch.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ngrc_core::baseline::{ComplexDiscriminator, MatchedFilterWeights};
use ngrc_core::{Decode, Discriminator, IQTrace, Layout, Matrix, Shot, ShotSet};
use num_complex::Complex64;

use crate::config::{spec_from_text, spec_to_text};
use crate::error::{Context, Error, Result};

pub const SHOTSET_MAGIC: &[u8; 4] = b"NGRQ";
pub const META_TAG: &[u8; 4] = b"META";
pub const MF_MAGIC: &[u8; 4] = b"MFW1";
pub const DISC_MAGIC: &[u8; 4] = b"DISC";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 * 6 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Binary,
    Csv,
}

impl Format {
    /// `.csv` files are CSV, everything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Binary,
        }
    }
}

pub fn save_shotset(set: &ShotSet, path: &Path, format: Format) -> Result<()> {
    let bytes = match format {
        Format::Binary => encode_shotset(set),
        Format::Csv => encode_csv(set)?,
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_shotset(path: &Path, format: Format) -> Result<ShotSet> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let context = path.display().to_string();
    match format {
        Format::Binary => decode_shotset(&bytes, &context),
        Format::Csv => decode_csv(&bytes, &context),
    }
}

pub fn encode_shotset(set: &ShotSet) -> Vec<u8> {
    let per_shot = 8 + set.n_channels() * set.n_samples() * 16;
    let mut out = Vec::with_capacity(HEADER_LEN + set.len() * per_shot);
    out.extend_from_slice(SHOTSET_MAGIC);
    for v in [
        VERSION,
        set.layout() as u32,
        set.n_qubits() as u32,
        set.n_classes() as u32,
        set.n_channels() as u32,
        set.n_samples() as u32,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(set.len() as u64).to_le_bytes());
    for shot in set.shots() {
        out.extend_from_slice(&shot.label.to_le_bytes());
        for ch in &shot.channels {
            for (i, q) in ch.i().iter().zip(ch.q()) {
                out.extend_from_slice(&i.to_le_bytes());
                out.extend_from_slice(&q.to_le_bytes());
            }
        }
    }
    if !set.meta.is_empty() {
        let start = out.len();
        out.extend_from_slice(&(set.meta.len() as u32).to_le_bytes());
        for (k, v) in &set.meta {
            put_str(&mut out, k);
            put_str(&mut out, v);
        }
        let len = (out.len() - start) as u64;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(META_TAG);
    }
    out
}

pub fn decode_shotset(bytes: &[u8], context: &str) -> Result<ShotSet> {
    let header = |reason: String| Error::MalformedHeader {
        context: context.to_string(),
        reason,
    };
    if bytes.len() < HEADER_LEN {
        return Err(header(format!("{} bytes, header needs {HEADER_LEN}", bytes.len())));
    }
    let mut r = Reader::new(&bytes[..HEADER_LEN]);
    if r.take(4)? != SHOTSET_MAGIC {
        return Err(header("bad magic, expected NGRQ".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(header(format!("unsupported version {version}")));
    }
    let layout_code = r.u32()?;
    let layout = Layout::from_code(layout_code).ok_or_else(|| header(format!("unknown layout code {layout_code}")))?;
    let n_qubits = r.u32()? as usize;
    let n_classes = r.u32()? as usize;
    let n_channels = r.u32()? as usize;
    let n_samples = r.u32()? as usize;
    let n_shots = usize::try_from(r.u64()?).map_err(|_| header("shot count overflows".into()))?;
    if n_shots > 0 && (n_channels == 0 || n_samples == 0) {
        return Err(header("shots declared with zero channels or samples".into()));
    }

    let (body, meta) = split_trailer(&bytes[HEADER_LEN..], context)?;
    let floats_per_shot = n_channels * n_samples * 2;
    let per_shot = 8 + floats_per_shot * 8;
    let expected = n_shots
        .checked_mul(per_shot)
        .ok_or_else(|| header("payload size overflows".into()))?;
    if body.len() != expected {
        // report the mismatch in samples where possible
        return Err(Error::Core {
            context: context.to_string(),
            source: ngrc_core::Error::LengthMismatch {
                expected: n_shots * n_channels * n_samples,
                found: body.len().saturating_sub(n_shots * 8) / 16,
            },
        });
    }

    let mut r = Reader::new(body);
    let mut shots = Vec::with_capacity(n_shots);
    for _ in 0..n_shots {
        let label = r.u64()?;
        let mut channels = Vec::with_capacity(n_channels);
        for _ in 0..n_channels {
            let mut i = Vec::with_capacity(n_samples);
            let mut q = Vec::with_capacity(n_samples);
            for _ in 0..n_samples {
                i.push(r.f64()?);
                q.push(r.f64()?);
            }
            channels.push(IQTrace::new(i, q).context(|| context.to_string())?);
        }
        shots.push(Shot::new(channels, label).context(|| context.to_string())?);
    }
    ShotSet::new(shots, n_qubits, n_classes, layout, meta).context(|| context.to_string())
}

fn split_trailer<'a>(rest: &'a [u8], context: &str) -> Result<(&'a [u8], BTreeMap<String, String>)> {
    let n = rest.len();
    if n < 12 || &rest[n - 4..] != META_TAG {
        return Ok((rest, BTreeMap::new()));
    }
    let len = u64::from_le_bytes(rest[n - 12..n - 4].try_into().unwrap_or_default());
    let Some(start) = usize::try_from(len).ok().and_then(|l| (n - 12).checked_sub(l)) else {
        return Ok((rest, BTreeMap::new()));
    };
    let mut r = Reader::new(&rest[start..n - 12]);
    let parsed = (|| -> Result<BTreeMap<String, String>> {
        let count = r.u32()?;
        let mut meta = BTreeMap::new();
        for _ in 0..count {
            let k = r.string()?;
            let v = r.string()?;
            meta.insert(k, v);
        }
        if !r.is_empty() {
            return Err(r.fail("trailing bytes in metadata"));
        }
        Ok(meta)
    })();
    match parsed {
        Ok(meta) => Ok((&rest[..start], meta)),
        Err(_) => Err(Error::MalformedHeader {
            context: context.to_string(),
            reason: "metadata trailer is corrupt".into(),
        }),
    }
}

const CSV_STRUCT_PREFIX: &str = "#!";
const CSV_META_PREFIX: &str = "#";

/// Long format: structural `#! key=value` lines, metadata `# key=value`
/// lines, then one row per sample. Floats use the shortest representation
/// that parses back to the same bits.
pub fn encode_csv(set: &ShotSet) -> Result<Vec<u8>> {
    let mut out = String::new();
    for (k, v) in [
        ("layout", (set.layout() as u32).to_string()),
        ("n_qubits", set.n_qubits().to_string()),
        ("n_classes", set.n_classes().to_string()),
        ("n_channels", set.n_channels().to_string()),
        ("n_samples", set.n_samples().to_string()),
        ("n_shots", set.len().to_string()),
    ] {
        out.push_str(&format!("{CSV_STRUCT_PREFIX} {k}={v}\n"));
    }
    for (k, v) in &set.meta {
        if k.contains(['\n', '=']) || v.contains('\n') {
            return Err(Error::Config(format!("metadata entry `{k}` cannot be written as CSV")));
        }
        out.push_str(&format!("{CSV_META_PREFIX} {k}={v}\n"));
    }
    let mut w = csv::Writer::from_writer(out.into_bytes());
    w.write_record(["shot", "label", "ch", "idx", "i", "q"])?;
    for (s, shot) in set.shots().iter().enumerate() {
        for (c, ch) in shot.channels.iter().enumerate() {
            for (n, (i, q)) in ch.i().iter().zip(ch.q()).enumerate() {
                w.write_record([
                    s.to_string(),
                    shot.label.to_string(),
                    c.to_string(),
                    n.to_string(),
                    format!("{i:?}"),
                    format!("{q:?}"),
                ])?;
            }
        }
    }
    w.into_inner().map_err(|e| Error::Config(format!("csv buffer: {e}")))
}

pub fn decode_csv(bytes: &[u8], context: &str) -> Result<ShotSet> {
    let header = |reason: String| Error::MalformedHeader {
        context: context.to_string(),
        reason,
    };
    let text = std::str::from_utf8(bytes).map_err(|_| header("not UTF-8".into()))?;
    let mut structure = BTreeMap::new();
    let mut meta = BTreeMap::new();
    let mut body_start = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim_end();
        let (target, rest) = if let Some(r) = trimmed.strip_prefix(CSV_STRUCT_PREFIX) {
            (&mut structure, r)
        } else if let Some(r) = trimmed.strip_prefix(CSV_META_PREFIX) {
            (&mut meta, r)
        } else {
            break;
        };
        let (k, v) = rest
            .trim_start()
            .split_once('=')
            .ok_or_else(|| header(format!("comment line without `=`: {trimmed}")))?;
        target.insert(k.to_string(), v.to_string());
        body_start += line.len();
    }
    let field = |key: &str| -> Result<usize> {
        structure
            .get(key)
            .ok_or_else(|| header(format!("missing `#! {key}=` line")))?
            .parse()
            .map_err(|_| header(format!("`{key}` is not an integer")))
    };
    let layout = Layout::from_code(field("layout")? as u32).ok_or_else(|| header("unknown layout code".into()))?;
    let (n_qubits, n_classes) = (field("n_qubits")?, field("n_classes")?);
    let (n_channels, n_samples, n_shots) = (field("n_channels")?, field("n_samples")?, field("n_shots")?);

    let mut reader = csv::Reader::from_reader(&bytes[body_start..]);
    let head = reader.headers()?.clone();
    if head.iter().collect::<Vec<_>>() != ["shot", "label", "ch", "idx", "i", "q"] {
        return Err(header(format!("unexpected column header {head:?}")));
    }
    let per_shot = n_channels * n_samples;
    let mut labels = vec![None; n_shots];
    let mut values = vec![(f64::NAN, f64::NAN); n_shots * per_shot];
    let mut seen = 0usize;
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let bad = |what: &str| header(format!("row {}: bad {what}", row + 1));
        let get = |idx: usize, what: &str| record.get(idx).ok_or_else(|| bad(what));
        let s: usize = get(0, "shot")?.parse().map_err(|_| bad("shot"))?;
        let label: u64 = get(1, "label")?.parse().map_err(|_| bad("label"))?;
        let c: usize = get(2, "ch")?.parse().map_err(|_| bad("ch"))?;
        let n: usize = get(3, "idx")?.parse().map_err(|_| bad("idx"))?;
        let i: f64 = get(4, "i")?.parse().map_err(|_| bad("i"))?;
        let q: f64 = get(5, "q")?.parse().map_err(|_| bad("q"))?;
        if s >= n_shots || c >= n_channels || n >= n_samples {
            return Err(bad("index (outside the declared shape)"));
        }
        match labels[s] {
            Some(l) if l != label => return Err(bad("label (differs within one shot)")),
            _ => labels[s] = Some(label),
        }
        values[s * per_shot + c * n_samples + n] = (i, q);
        seen += 1;
    }
    if seen != n_shots * per_shot {
        return Err(Error::Core {
            context: context.to_string(),
            source: ngrc_core::Error::LengthMismatch {
                expected: n_shots * per_shot,
                found: seen,
            },
        });
    }
    let mut shots = Vec::with_capacity(n_shots);
    for (s, label) in labels.into_iter().enumerate() {
        let mut channels = Vec::with_capacity(n_channels);
        for c in 0..n_channels {
            let span = &values[s * per_shot + c * n_samples..s * per_shot + (c + 1) * n_samples];
            let trace = IQTrace::new(span.iter().map(|v| v.0).collect(), span.iter().map(|v| v.1).collect());
            channels.push(trace.context(|| context.to_string())?);
        }
        let label = label.ok_or_else(|| header(format!("shot {s} has no rows")))?;
        shots.push(Shot::new(channels, label).context(|| context.to_string())?);
    }
    ShotSet::new(shots, n_qubits, n_classes, layout, meta).context(|| context.to_string())
}

/// A fitted matched filter with its decision rule.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedFilterModel {
    pub weights: MatchedFilterWeights,
    pub discriminator: ComplexDiscriminator,
}

/// `"MFW1"`, version, n, n complex weights, then origin, axis and threshold.
pub fn encode_matched_filter(model: &MatchedFilterModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MF_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(model.weights.len() as u64).to_le_bytes());
    let d = &model.discriminator;
    let tail = [d.origin.re, d.origin.im, d.axis.re, d.axis.im, d.threshold];
    for x in model.weights.weights().iter().flat_map(|k| [k.re, k.im]).chain(tail) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode_matched_filter(bytes: &[u8], context: &str) -> Result<MatchedFilterModel> {
    let mut r = Reader::new(bytes);
    expect_record(&mut r, MF_MAGIC, context)?;
    let n = r.u64()? as usize;
    let mut k = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        k.push(Complex64::new(r.f64()?, r.f64()?));
    }
    let origin = Complex64::new(r.f64()?, r.f64()?);
    let axis = Complex64::new(r.f64()?, r.f64()?);
    let threshold = r.f64()?;
    if !r.is_empty() {
        return Err(r.fail("trailing bytes after record"));
    }
    Ok(MatchedFilterModel {
        weights: MatchedFilterWeights::new(k).context(|| context.to_string())?,
        discriminator: ComplexDiscriminator {
            origin,
            axis,
            threshold,
        },
    })
}

/// `"DISC"`, version, spec text, α, decode rule, target, then the
/// row-major weight matrix.
pub fn encode_discriminator(model: &Discriminator) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(DISC_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    put_str(&mut out, &spec_to_text(&model.spec));
    out.extend_from_slice(&model.alpha.to_le_bytes());
    let (kind, t) = match model.decode {
        Decode::Threshold(t) => (0u32, t),
        Decode::Argmax => (1, 0.0),
    };
    out.extend_from_slice(&kind.to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    let target = model.target_qubit.map_or(u32::MAX, |t| t as u32);
    out.extend_from_slice(&target.to_le_bytes());
    out.extend_from_slice(&(model.w_out.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(model.w_out.cols() as u32).to_le_bytes());
    for x in model.w_out.as_slice() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode_discriminator(bytes: &[u8], context: &str) -> Result<Discriminator> {
    let mut r = Reader::new(bytes);
    expect_record(&mut r, DISC_MAGIC, context)?;
    let spec = spec_from_text(&r.string()?)?;
    let alpha = r.f64()?;
    let kind = r.u32()?;
    let t = r.f64()?;
    let decode = match kind {
        0 => Decode::Threshold(t),
        1 => Decode::Argmax,
        other => return Err(r.fail(&format!("unknown decode rule {other}"))),
    };
    let target = match r.u32()? {
        u32::MAX => None,
        t => Some(t as usize),
    };
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    let mut w = Vec::with_capacity((rows * cols).min(1 << 24));
    for _ in 0..rows * cols {
        w.push(r.f64()?);
    }
    if !r.is_empty() {
        return Err(r.fail("trailing bytes after record"));
    }
    let w_out = Matrix::from_vec(rows, cols, w).context(|| context.to_string())?;
    Discriminator::new(w_out, spec, decode, alpha, target).context(|| context.to_string())
}

pub fn save_discriminator(model: &Discriminator, path: &Path) -> Result<()> {
    fs::write(path, encode_discriminator(model)).map_err(|e| Error::io(path, e))
}

pub fn load_discriminator(path: &Path) -> Result<Discriminator> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_discriminator(&bytes, &path.display().to_string())
}

pub fn save_matched_filter(model: &MatchedFilterModel, path: &Path) -> Result<()> {
    fs::write(path, encode_matched_filter(model)).map_err(|e| Error::io(path, e))
}

pub fn load_matched_filter(path: &Path) -> Result<MatchedFilterModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_matched_filter(&bytes, &path.display().to_string())
}

fn expect_record(r: &mut Reader<'_>, magic: &[u8; 4], context: &str) -> Result<()> {
    let header = |reason: String| Error::MalformedHeader {
        context: context.to_string(),
        reason,
    };
    let tag = r.take(4).map_err(|_| header("file too short".into()))?;
    if tag != magic {
        return Err(header(format!("bad magic, expected {}", String::from_utf8_lossy(magic))));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(header(format!("unsupported version {version}")));
    }
    Ok(())
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

/// Little-endian cursor over a byte slice.
struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn fail(&self, reason: &str) -> Error {
        Error::MalformedHeader {
            context: format!("byte {}", self.pos),
            reason: reason.to_string(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| self.fail("unexpected end of data"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut a = [0u8; N];
        a.copy_from_slice(self.take(N)?);
        Ok(a)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let raw = self.take(n)?;
        String::from_utf8(raw.to_vec()).map_err(|_| self.fail("string is not UTF-8"))
    }

    fn is_empty(&self) -> bool {
        self.pos == self.bytes.len()
    }
}
