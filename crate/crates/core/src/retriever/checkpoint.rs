use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::encoder::EncoderModel;
use super::RetrieverError;

/// Binary model file layout (all integers little-endian):
///
/// ```text
/// offset  size  field
/// 0       8     magic "ELICENCB"
/// 8       4     u32 format version (currently 1)
/// 12      8     u64 bucket count
/// 20      4     u32 embedding dimension
/// 24      8     u64 init seed
/// 32      8*buckets*dim  f64 weights, row-major by bucket
/// ```
///
/// The file length must match the header exactly; weights round-trip
/// bit-for-bit.
const MAGIC: [u8; 8] = *b"ELICENCB";
pub const CHECKPOINT_VERSION: u32 = 1;

fn io_err(path: &Path, source: std::io::Error) -> RetrieverError {
    RetrieverError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn corrupt(path: &Path, reason: impl Into<String>) -> RetrieverError {
    RetrieverError::Checkpoint {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub fn save_model(path: impl AsRef<Path>, model: &EncoderModel) -> Result<(), RetrieverError> {
    let path = path.as_ref();
    if model.weights.iter().any(|w| !w.is_finite()) {
        return Err(RetrieverError::NonFinite("model weights".into()));
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = |bytes: &[u8]| out.write_all(bytes).map_err(|e| io_err(path, e));
    write(&MAGIC)?;
    write(&CHECKPOINT_VERSION.to_le_bytes())?;
    write(&(model.buckets as u64).to_le_bytes())?;
    write(&(model.dim as u32).to_le_bytes())?;
    write(&model.seed.to_le_bytes())?;
    for w in &model.weights {
        write(&w.to_le_bytes())?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EncoderModel, RetrieverError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);

    let mut magic = [0u8; 8];
    reader
        .read_exact(&mut magic)
        .map_err(|_| corrupt(path, "missing or short header"))?;
    if magic != MAGIC {
        return Err(corrupt(path, "not an encoder checkpoint (bad magic)"));
    }
    let mut u32_buf = [0u8; 4];
    let mut u64_buf = [0u8; 8];
    reader
        .read_exact(&mut u32_buf)
        .map_err(|_| corrupt(path, "missing or short header"))?;
    let version = u32::from_le_bytes(u32_buf);
    if version != CHECKPOINT_VERSION {
        return Err(RetrieverError::CheckpointVersion {
            path: path.to_path_buf(),
            version,
        });
    }
    reader
        .read_exact(&mut u64_buf)
        .map_err(|_| corrupt(path, "missing or short header"))?;
    let buckets = u64::from_le_bytes(u64_buf);
    reader
        .read_exact(&mut u32_buf)
        .map_err(|_| corrupt(path, "missing or short header"))?;
    let dim = u32::from_le_bytes(u32_buf);
    reader
        .read_exact(&mut u64_buf)
        .map_err(|_| corrupt(path, "missing or short header"))?;
    let seed = u64::from_le_bytes(u64_buf);

    if buckets == 0 || dim == 0 {
        return Err(corrupt(path, format!("degenerate shape {buckets}x{dim}")));
    }
    let count = usize::try_from(buckets)
        .ok()
        .and_then(|b| b.checked_mul(dim as usize))
        .ok_or_else(|| corrupt(path, format!("shape {buckets}x{dim} overflows")))?;

    let mut weights = Vec::with_capacity(count);
    let mut f64_buf = [0u8; 8];
    for i in 0..count {
        reader.read_exact(&mut f64_buf).map_err(|_| {
            corrupt(
                path,
                format!("truncated weight block: expected {count} values, got {i}"),
            )
        })?;
        let w = f64::from_le_bytes(f64_buf);
        if !w.is_finite() {
            return Err(corrupt(path, format!("non-finite weight at index {i}")));
        }
        weights.push(w);
    }
    let mut extra = [0u8; 1];
    match reader.read(&mut extra) {
        Ok(0) => {}
        Ok(_) => return Err(corrupt(path, "trailing bytes after weight block")),
        Err(e) => return Err(io_err(path, e)),
    }

    Ok(EncoderModel {
        buckets: buckets as usize,
        dim: dim as usize,
        seed,
        weights,
    })
}
