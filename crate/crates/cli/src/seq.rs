//! Sequence selectors and the on-disk cache of `u64` prefixes.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use modsig::hofstadter::eval_direct;
use modsig::numeration::{Registry, ReplacementMap};
use modsig::seqcore::{generate_factorial_sums, generate_recurrent, generate_ulam, RecurrenceSpec, SequenceTable};
use modsig::weyl::to_u64_stream;

const MAGIC: &[u8; 8] = b"MSIGU64\x01";

/// `--seq` values. `hofstadter` and `narayana_d` take `--d`.
pub const NAMES: &str = "hofstadter, narayana, narayana_d, fibonacci, sqrt13, sqrt6, ulam, factorial_sums, identity, map:<registry map>";

#[derive(Clone, Debug)]
pub struct Selector {
    pub name: String,
    pub d: usize,
}

impl Selector {
    pub fn new(name: &str, d: usize) -> Result<Self> {
        let known = [
            "hofstadter",
            "narayana",
            "narayana_d",
            "fibonacci",
            "sqrt13",
            "sqrt6",
            "ulam",
            "factorial_sums",
            "identity",
        ];
        if !known.contains(&name) && !name.starts_with("map:") {
            bail!("unknown sequence `{name}` (expected one of: {NAMES})");
        }
        if !(1..=64).contains(&d) {
            bail!("--d must lie in 1..=64");
        }
        if let Some(m) = name.strip_prefix("map:") {
            if !Registry::default().map_names().contains(&m) {
                bail!(
                    "unknown map `{m}` (registered: {})",
                    Registry::default().map_names().join(", ")
                );
            }
        }
        Ok(Selector {
            name: name.to_string(),
            d,
        })
    }

    /// Name used for cache files and output stems.
    pub fn key(&self) -> String {
        match self.name.as_str() {
            "hofstadter" => format!("hofstadter_d{}", self.d),
            "narayana_d" => format!("narayana_d{}", self.d),
            n => n.replace(':', "_"),
        }
    }

    fn recurrence(&self) -> Option<RecurrenceSpec> {
        Some(match self.name.as_str() {
            "narayana" => RecurrenceSpec::narayana(),
            "narayana_d" => RecurrenceSpec::generalized_narayana(self.d),
            "fibonacci" => RecurrenceSpec::fibonacci(),
            "sqrt13" => RecurrenceSpec::sqrt13_example(),
            "sqrt6" => RecurrenceSpec::sqrt6_example(),
            _ => return None,
        })
    }

    pub fn is_exponential(&self) -> bool {
        self.recurrence().is_some() || self.name == "factorial_sums"
    }

    /// Exact terms, for sequences whose values leave machine range.
    pub fn table(&self, n: usize) -> Result<SequenceTable> {
        if let Some(spec) = self.recurrence() {
            return Ok(generate_recurrent(&spec, n.max(spec.order()))?);
        }
        match self.name.as_str() {
            "factorial_sums" => Ok(generate_factorial_sums(n)?),
            "ulam" => Ok(generate_ulam(n.max(2))?),
            _ => Ok(SequenceTable::from_u64(self.key(), &self.values(n)?)),
        }
    }

    /// The replacement map behind a Hofstadter or registry selector.
    pub fn map(&self, max_n: u64) -> Result<ReplacementMap> {
        if self.name == "hofstadter" {
            return Ok(ReplacementMap::hofstadter(self.d, max_n)?);
        }
        match self.name.strip_prefix("map:") {
            Some(m) => Ok(Registry::default().map(m, max_n)?),
            None => bail!("`{}` is not a replacement sequence", self.name),
        }
    }

    /// The first `n` values as machine words, read from the cache when present.
    ///
    /// Hofstadter selectors give `H(1..=n)`, registry maps `A(0..n)`.
    pub fn values(&self, n: usize) -> Result<Vec<u64>> {
        if n == 0 {
            bail!("the term count must be positive");
        }
        let path = cache_dir().join(format!("{}-{n}.u64", self.key()));
        if let Some(v) = read_cache(&path)? {
            return Ok(v);
        }
        self.compute(n)
    }

    fn compute(&self, n: usize) -> Result<Vec<u64>> {
        Ok(match self.name.as_str() {
            "hofstadter" => eval_direct(self.d, n).split_off(1),
            "identity" => (1..=n as u64).collect(),
            "ulam" => generate_ulam(n.max(2))?.u64_prefix()[..n].to_vec(),
            name if name.starts_with("map:") => self.map(n as u64)?.bulk(n)?.values,
            _ => to_u64_stream(self.table(n)?.terms())
                .with_context(|| format!("`{}` leaves 64-bit range within {n} terms", self.name))?,
        })
    }

    /// Computes the prefix and stores it in the cache.
    pub fn materialize(&self, n: usize) -> Result<(Vec<u64>, PathBuf)> {
        let v = self.compute(n)?;
        let dir = cache_dir();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(format!("{}-{n}.u64", self.key()));
        write_cache(&path, &v)?;
        Ok((v, path))
    }
}

/// `MODSIG_CACHE_DIR`, or `.modsig-cache` in the working directory.
pub fn cache_dir() -> PathBuf {
    std::env::var_os("MODSIG_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".modsig-cache"))
}

fn write_cache(path: &PathBuf, v: &[u64]) -> Result<()> {
    let tmp = path.with_extension("u64.tmp");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        w.write_all(MAGIC)?;
        w.write_all(&(v.len() as u64).to_le_bytes())?;
        for x in v {
            w.write_all(&x.to_le_bytes())?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_cache(path: &PathBuf) -> Result<Option<Vec<u64>>> {
    let f = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut r = BufReader::new(f);
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if &head[..8] != MAGIC {
        return Err(anyhow!("{} is not a sequence cache", path.display()));
    }
    let n = u64::from_le_bytes(head[8..].try_into().expect("8 bytes")) as usize;
    let mut bytes = Vec::with_capacity(n * 8);
    r.read_to_end(&mut bytes)?;
    if bytes.len() != n * 8 {
        return Err(anyhow!("{} is truncated", path.display()));
    }
    Ok(Some(
        bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect(),
    ))
}
