//! Model bundle container.
//!
//! Layout (little-endian):
//!
//! ```text
//! "VEOB" u32 version u32 section_count
//! section*: u32 name_len, name, u8 tag, u64 payload_len, payload
//! ```
//!
//! The last section is the manifest: one `(name, FNV-1a 64)` pair per
//! preceding section, hashed over tag and payload. Matrices are `u32 rows,
//! u32 cols` followed by `f32` values in column-major order.

use std::hash::Hasher;
use std::io::Write;
use std::path::Path;

use fnv::FnvHasher;
use nalgebra::DMatrix;
use veob::partition::Node;
use veob::supervised::{SupervisedCell, SupervisedParts, TargetBasis};
use veob::{Cell, EmbeddingModel, PartitionTree, SupervisedModel};

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"VEOB";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Tag {
    Matrix = 1,
    Strings = 2,
    U32s = 3,
    EmbeddingModel = 4,
    PartitionTree = 5,
    SupervisedModel = 6,
    Text = 7,
    Manifest = 255,
}

impl Tag {
    fn from_u8(v: u8) -> CliResult<Self> {
        Ok(match v {
            1 => Tag::Matrix,
            2 => Tag::Strings,
            3 => Tag::U32s,
            4 => Tag::EmbeddingModel,
            5 => Tag::PartitionTree,
            6 => Tag::SupervisedModel,
            7 => Tag::Text,
            255 => Tag::Manifest,
            other => return Err(CliError::Format(format!("unknown section tag {other}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub tag: Tag,
    pub payload: Vec<u8>,
}

fn section_hash(tag: Tag, payload: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(&[tag as u8]);
    h.write(payload);
    h.finish()
}

/// Ordered named sections.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bundle {
    sections: Vec<Section>,
}

impl Bundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn push(&mut self, name: &str, tag: Tag, payload: Vec<u8>) {
        self.sections.retain(|s| s.name != name);
        self.sections.push(Section {
            name: name.to_owned(),
            tag,
            payload,
        });
    }

    pub fn get(&self, name: &str, tag: Tag) -> CliResult<&[u8]> {
        let s = self
            .sections
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| CliError::Format(format!("bundle has no section {name:?}")))?;
        if s.tag != tag {
            return Err(CliError::Format(format!(
                "section {name:?} has type {:?}, expected {tag:?}",
                s.tag
            )));
        }
        Ok(&s.payload)
    }

    pub fn has(&self, name: &str) -> bool {
        self.sections.iter().any(|s| s.name == name)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut manifest = Enc::default();
        manifest.u32(self.sections.len() as u32);
        for s in &self.sections {
            manifest.str(&s.name);
            manifest.u64(section_hash(s.tag, &s.payload));
        }
        let mut out = Enc::default();
        out.0.extend_from_slice(MAGIC);
        out.u32(VERSION);
        out.u32(self.sections.len() as u32 + 1);
        let manifest = Section {
            name: "manifest".into(),
            tag: Tag::Manifest,
            payload: manifest.0,
        };
        for s in self.sections.iter().chain(std::iter::once(&manifest)) {
            out.str(&s.name);
            out.u8(s.tag as u8);
            out.u64(s.payload.len() as u64);
            out.0.extend_from_slice(&s.payload);
        }
        out.0
    }

    pub fn from_bytes(bytes: &[u8]) -> CliResult<Self> {
        let mut d = Dec::new(bytes);
        if d.take(4)? != MAGIC {
            return Err(CliError::Format("not a bundle (bad magic)".into()));
        }
        let version = d.u32()?;
        if version != VERSION {
            return Err(CliError::Format(format!("unsupported bundle version {version}")));
        }
        let count = d.u32()? as usize;
        let mut sections = Vec::new();
        for _ in 0..count {
            let name = d.str()?;
            let tag = Tag::from_u8(d.u8()?)?;
            let len = d.u64()? as usize;
            let payload = d.take(len)?.to_vec();
            sections.push(Section { name, tag, payload });
        }
        if !d.is_empty() {
            return Err(CliError::Format("trailing bytes after last section".into()));
        }
        let manifest = match sections.pop() {
            Some(s) if s.tag == Tag::Manifest => s,
            _ => return Err(CliError::Format("bundle manifest missing".into())),
        };
        let mut m = Dec::new(&manifest.payload);
        let n = m.u32()? as usize;
        if n != sections.len() {
            return Err(CliError::Format("manifest section count mismatch".into()));
        }
        for s in &sections {
            let name = m.str()?;
            let hash = m.u64()?;
            if name != s.name || hash != section_hash(s.tag, &s.payload) {
                return Err(CliError::Format(format!("manifest check failed for section {:?}", s.name)));
            }
        }
        Ok(Self { sections })
    }

    /// Writes to a temporary file beside `path`, then renames it into place.
    pub fn save(&self, path: &Path) -> CliResult<()> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(&self.to_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
        Ok(())
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(path)?;
        Self::from_bytes(&bytes)
    }

    pub fn put_matrix(&mut self, name: &str, m: &DMatrix<f64>) {
        let mut e = Enc::default();
        e.matrix(m);
        self.push(name, Tag::Matrix, e.0);
    }

    pub fn matrix(&self, name: &str) -> CliResult<DMatrix<f64>> {
        Dec::new(self.get(name, Tag::Matrix)?).matrix()
    }

    pub fn put_strings<S: AsRef<str>>(&mut self, name: &str, items: &[S]) {
        let mut e = Enc::default();
        e.u32(items.len() as u32);
        for s in items {
            e.str(s.as_ref());
        }
        self.push(name, Tag::Strings, e.0);
    }

    pub fn strings(&self, name: &str) -> CliResult<Vec<String>> {
        let mut d = Dec::new(self.get(name, Tag::Strings)?);
        let n = d.u32()? as usize;
        (0..n).map(|_| d.str()).collect()
    }

    pub fn put_u32s(&mut self, name: &str, items: &[u32]) {
        let mut e = Enc::default();
        e.u32s(items);
        self.push(name, Tag::U32s, e.0);
    }

    pub fn u32s(&self, name: &str) -> CliResult<Vec<u32>> {
        Dec::new(self.get(name, Tag::U32s)?).u32s()
    }

    pub fn put_text(&mut self, name: &str, text: &str) {
        self.push(name, Tag::Text, text.as_bytes().to_vec());
    }

    pub fn text(&self, name: &str) -> CliResult<String> {
        String::from_utf8(self.get(name, Tag::Text)?.to_vec())
            .map_err(|_| CliError::Format(format!("section {name:?} is not UTF-8")))
    }

    pub fn put_model(&mut self, name: &str, model: &EmbeddingModel) {
        let mut e = Enc::default();
        e.str(model.label());
        e.matrix(model.basis());
        e.f32s(model.spectrum());
        self.push(name, Tag::EmbeddingModel, e.0);
    }

    pub fn model(&self, name: &str) -> CliResult<EmbeddingModel> {
        let mut d = Dec::new(self.get(name, Tag::EmbeddingModel)?);
        let label = d.str()?;
        let basis = d.matrix()?;
        let sigma = d.f32s()?;
        Ok(EmbeddingModel::from_parts(basis, sigma, label)?)
    }

    pub fn put_tree(&mut self, name: &str, tree: &PartitionTree) {
        let mut e = Enc::default();
        e.u32(tree.dim() as u32);
        e.u32(tree.max_levels() as u32);
        e.u32(tree.min_cell() as u32);
        e.u32(tree.nodes().len() as u32);
        for node in tree.nodes() {
            match node {
                Node::Split {
                    centroid,
                    axis,
                    left,
                    right,
                } => {
                    e.u8(0);
                    e.f32s(centroid);
                    e.f32s(axis);
                    e.u32(*left as u32);
                    e.u32(*right as u32);
                }
                Node::Leaf { centroid, cell } => {
                    e.u8(1);
                    e.f32s(centroid);
                    e.u32(cell.map_or(u32::MAX, |c| c as u32));
                }
            }
        }
        e.u32(tree.cells().len() as u32);
        for c in tree.cells() {
            e.f32s(&c.centroid);
            let members: Vec<u32> = c.members.iter().map(|&m| m as u32).collect();
            e.u32s(&members);
        }
        self.push(name, Tag::PartitionTree, e.0);
    }

    /// Cell radii are recomputed against `samples` (the stored embeddings) so
    /// pruning stays exact at stored precision.
    pub fn tree(&self, name: &str, samples: &DMatrix<f64>) -> CliResult<PartitionTree> {
        let mut d = Dec::new(self.get(name, Tag::PartitionTree)?);
        let dim = d.u32()? as usize;
        let max_levels = d.u32()? as usize;
        let min_cell = d.u32()? as usize;
        let n_nodes = d.u32()? as usize;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            nodes.push(match d.u8()? {
                0 => Node::Split {
                    centroid: d.f32s()?,
                    axis: d.f32s()?,
                    left: d.u32()? as usize,
                    right: d.u32()? as usize,
                },
                1 => Node::Leaf {
                    centroid: d.f32s()?,
                    cell: match d.u32()? {
                        u32::MAX => None,
                        c => Some(c as usize),
                    },
                },
                t => return Err(CliError::Format(format!("bad tree node tag {t}"))),
            });
        }
        let n_cells = d.u32()? as usize;
        let mut cells = Vec::with_capacity(n_cells);
        for _ in 0..n_cells {
            let centroid = d.f32s()?;
            let members: Vec<usize> = d.u32s()?.into_iter().map(|m| m as usize).collect();
            if members.iter().any(|&m| m >= samples.ncols()) || samples.nrows() != dim {
                return Err(CliError::Format("tree does not match stored embeddings".into()));
            }
            cells.push(Cell::from_members(centroid, members, samples));
        }
        Ok(PartitionTree::from_parts(dim, nodes, cells, max_levels, min_cell)?)
    }

    pub fn put_supervised(&mut self, name: &str, model: &SupervisedModel) {
        let p = model.parts();
        let mut e = Enc::default();
        e.matrix(&p.ux);
        match &p.target {
            TargetBasis::Basis(u) => {
                e.u8(0);
                e.matrix(u);
            }
            TargetBasis::OneHot { classes } => {
                e.u8(1);
                e.u32(*classes as u32);
            }
        }
        e.matrix(&p.uz);
        e.0.extend_from_slice(&p.alpha.to_le_bytes());
        e.u32(p.cells.len() as u32);
        for c in &p.cells {
            e.f32s(&c.cell.centroid);
            let members: Vec<u32> = c.cell.members.iter().map(|&m| m as u32).collect();
            e.u32s(&members);
            e.matrix(&c.ac);
            match &c.histogram {
                Some(h) => {
                    e.u8(1);
                    e.f32s(h);
                }
                None => e.u8(0),
            }
            e.u8(c.underdetermined as u8);
        }
        e.matrix(&p.train_px);
        e.matrix(&p.train_pz);
        match &p.train_labels {
            Some(l) => {
                e.u8(1);
                let l: Vec<u32> = l.iter().map(|&v| v as u32).collect();
                e.u32s(&l);
            }
            None => e.u8(0),
        }
        self.push(name, Tag::SupervisedModel, e.0);
    }

    pub fn supervised(&self, name: &str) -> CliResult<SupervisedModel> {
        let mut d = Dec::new(self.get(name, Tag::SupervisedModel)?);
        let ux = d.matrix()?;
        let target = match d.u8()? {
            0 => TargetBasis::Basis(d.matrix()?),
            1 => TargetBasis::OneHot {
                classes: d.u32()? as usize,
            },
            t => return Err(CliError::Format(format!("bad target tag {t}"))),
        };
        let uz = d.matrix()?;
        let alpha = f64::from_le_bytes(d.take(8)?.try_into().expect("8 bytes"));
        let n_cells = d.u32()? as usize;
        let mut raw = Vec::with_capacity(n_cells);
        for _ in 0..n_cells {
            let centroid = d.f32s()?;
            let members: Vec<usize> = d.u32s()?.into_iter().map(|m| m as usize).collect();
            let ac = d.matrix()?;
            let histogram = match d.u8()? {
                0 => None,
                _ => Some(d.f32s()?),
            };
            let underdetermined = d.u8()? != 0;
            raw.push((centroid, members, ac, histogram, underdetermined));
        }
        let train_px = d.matrix()?;
        let train_pz = d.matrix()?;
        let train_labels = match d.u8()? {
            0 => None,
            _ => Some(d.u32s()?.into_iter().map(|v| v as usize).collect()),
        };
        let mut cells = Vec::with_capacity(n_cells);
        for (centroid, members, ac, histogram, underdetermined) in raw {
            if members.iter().any(|&m| m >= train_pz.ncols()) {
                return Err(CliError::Format("cell member out of range".into()));
            }
            cells.push(SupervisedCell {
                cell: Cell::from_members(centroid, members, &train_pz),
                ac,
                histogram,
                underdetermined,
            });
        }
        Ok(SupervisedModel::from_parts(SupervisedParts {
            ux,
            target,
            uz,
            alpha,
            cells,
            train_px,
            train_pz,
            train_labels,
        })?)
    }
}

#[derive(Default)]
struct Enc(Vec<u8>);

impl Enc {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }

    fn f32s(&mut self, v: &[f64]) {
        self.u32(v.len() as u32);
        for x in v {
            self.0.extend_from_slice(&(*x as f32).to_le_bytes());
        }
    }

    fn u32s(&mut self, v: &[u32]) {
        self.u32(v.len() as u32);
        for x in v {
            self.u32(*x);
        }
    }

    fn matrix(&mut self, m: &DMatrix<f64>) {
        self.u32(m.nrows() as u32);
        self.u32(m.ncols() as u32);
        self.0.reserve(m.len() * 4);
        for x in m.iter() {
            self.0.extend_from_slice(&(*x as f32).to_le_bytes());
        }
    }
}

struct Dec<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Dec<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn is_empty(&self) -> bool {
        self.pos == self.buf.len()
    }

    fn take(&mut self, n: usize) -> CliResult<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| CliError::Format("bundle is truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> CliResult<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> CliResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> CliResult<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f32(&mut self) -> CliResult<f64> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as f64)
    }

    fn str(&mut self) -> CliResult<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| CliError::Format("string is not UTF-8".into()))
    }

    fn f32s(&mut self) -> CliResult<Vec<f64>> {
        let n = self.u32()? as usize;
        self.take(n.saturating_mul(4))?;
        self.pos -= n * 4;
        (0..n).map(|_| self.f32()).collect()
    }

    fn u32s(&mut self) -> CliResult<Vec<u32>> {
        let n = self.u32()? as usize;
        self.take(n.saturating_mul(4))?;
        self.pos -= n * 4;
        (0..n).map(|_| self.u32()).collect()
    }

    fn matrix(&mut self) -> CliResult<DMatrix<f64>> {
        let r = self.u32()? as usize;
        let c = self.u32()? as usize;
        let n = r
            .checked_mul(c)
            .ok_or_else(|| CliError::Format("matrix dimensions overflow".into()))?;
        let raw = self.take(n.saturating_mul(4))?;
        let data: Vec<f64> = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64)
            .collect();
        Ok(DMatrix::from_vec(r, c, data))
    }
}
