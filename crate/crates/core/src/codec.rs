//! Binary graph file format.
//!
//! Little-endian throughout:
//!
//! ```text
//! "XWLK" | version: u32 = 1 | node_count: u64 | arc_count: u64
//! node_count × (kind: u8 | key_len: u32 | key: UTF-8)
//! (node_count + 1) × offset: u64
//! arc_count × target: u64
//! arc_count × cdf: f64
//! ```

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::graph::{CsrGraph, GraphError, NodeId, NodeKind};
use crate::scalar::Scalar;

pub const MAGIC: [u8; 4] = *b"XWLK";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("not a graph file (bad magic {0:?})")]
    BadMagic([u8; 4]),
    #[error("unsupported graph file version {0}")]
    UnsupportedVersion(u32),
    #[error("graph file is truncated")]
    Truncated,
    #[error("unknown node kind tag {0}")]
    BadKind(u8),
    #[error("node key is not valid UTF-8")]
    BadKey,
    #[error("value {0} does not fit in memory indices")]
    Overflow(u64),
    #[error("graph file violates an invariant: {0}")]
    Invalid(#[from] GraphError),
    #[error(transparent)]
    Io(io::Error),
}

impl From<io::Error> for LoadError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            LoadError::Truncated
        } else {
            LoadError::Io(e)
        }
    }
}

/// Writes `graph` to `sink`, returning the number of bytes written. Output is
/// a pure function of the graph's structure.
pub fn write_graph<F: Scalar, W: Write>(graph: &CsrGraph<F>, sink: &mut W) -> io::Result<u64> {
    let mut written = 0u64;
    let mut put = |bytes: &[u8]| -> io::Result<()> {
        sink.write_all(bytes)?;
        written += bytes.len() as u64;
        Ok(())
    };
    put(&MAGIC)?;
    put(&VERSION.to_le_bytes())?;
    put(&(graph.node_count() as u64).to_le_bytes())?;
    put(&(graph.arc_count() as u64).to_le_bytes())?;
    for node in graph.nodes() {
        let key = node.key.as_bytes();
        let len = u32::try_from(key.len())
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "node key longer than 4 GiB"))?;
        put(&[node.kind.tag()])?;
        put(&len.to_le_bytes())?;
        put(key)?;
    }
    for &o in graph.offsets() {
        put(&(o as u64).to_le_bytes())?;
    }
    for t in graph.targets() {
        put(&u64::from(t.0).to_le_bytes())?;
    }
    for c in graph.cdf() {
        put(&c.as_f64().to_le_bytes())?;
    }
    Ok(written)
}

pub fn to_bytes<F: Scalar>(graph: &CsrGraph<F>) -> Vec<u8> {
    let mut buf = Vec::new();
    write_graph(graph, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

/// Reads a graph written by [`write_graph`] and re-validates it.
pub fn read_graph<F: Scalar, R: Read>(source: &mut R) -> Result<CsrGraph<F>, LoadError> {
    let mut magic = [0u8; 4];
    source.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(LoadError::BadMagic(magic));
    }
    let version = read_u32(source)?;
    if version != VERSION {
        return Err(LoadError::UnsupportedVersion(version));
    }
    let node_count = to_usize(read_u64(source)?)?;
    let arc_count = to_usize(read_u64(source)?)?;
    if node_count > u32::MAX as usize {
        return Err(LoadError::Overflow(node_count as u64));
    }

    // Capacities are capped so a corrupt header cannot force a huge allocation
    // before the stream runs dry.
    const PREALLOC: usize = 1 << 20;
    let mut nodes = Vec::with_capacity(node_count.min(PREALLOC));
    for _ in 0..node_count {
        let mut tag = [0u8; 1];
        source.read_exact(&mut tag)?;
        let kind = NodeKind::from_tag(tag[0]).ok_or(LoadError::BadKind(tag[0]))?;
        let len = read_u32(source)? as usize;
        let mut key = Vec::with_capacity(len.min(PREALLOC));
        source.take(len as u64).read_to_end(&mut key)?;
        if key.len() != len {
            return Err(LoadError::Truncated);
        }
        let key = String::from_utf8(key).map_err(|_| LoadError::BadKey)?;
        nodes.push((kind, key));
    }
    let mut offsets = Vec::with_capacity((node_count + 1).min(PREALLOC));
    for _ in 0..=node_count {
        offsets.push(to_usize(read_u64(source)?)?);
    }
    let mut targets = Vec::with_capacity(arc_count.min(PREALLOC));
    for _ in 0..arc_count {
        let t = read_u64(source)?;
        let t = u32::try_from(t).map_err(|_| LoadError::Overflow(t))?;
        targets.push(NodeId(t));
    }
    let mut cdf = Vec::with_capacity(arc_count.min(PREALLOC));
    for _ in 0..arc_count {
        let mut b = [0u8; 8];
        source.read_exact(&mut b)?;
        cdf.push(F::of(f64::from_le_bytes(b)));
    }
    Ok(CsrGraph::from_parts(nodes, offsets, targets, cdf)?)
}

pub fn from_bytes<F: Scalar>(mut bytes: &[u8]) -> Result<CsrGraph<F>, LoadError> {
    read_graph(&mut bytes)
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn to_usize(v: u64) -> Result<usize, LoadError> {
    usize::try_from(v).map_err(|_| LoadError::Overflow(v))
}
