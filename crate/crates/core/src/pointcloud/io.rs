//! PLY (ASCII and binary little-endian) and XYZ text readers, PLY writers.
//!
//! Only the `x`, `y`, `z` properties of the `vertex` element are read; they must
//! be `float`/`float32` or `double`/`float64`. Every other property and element
//! is skipped. Errors carry the byte offset where parsing failed.

use super::{CloudError, PointCloud};
use crate::geo::LocalPoint;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    /// PLY; ASCII or binary little-endian is read from the header.
    Ply,
    /// Whitespace-separated `x y z` per line; extra columns ignored.
    Xyz,
}

impl CloudFormat {
    pub fn from_path(path: &Path) -> Result<Self, CloudError> {
        let ext = path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).unwrap_or_default();
        match ext.as_str() {
            "ply" => Ok(CloudFormat::Ply),
            "xyz" | "txt" | "pts" => Ok(CloudFormat::Xyz),
            _ => Err(CloudError::UnsupportedFormat(path.display().to_string())),
        }
    }
}

/// Reads a cloud, inferring the format from the extension when `format` is `None`.
pub fn load_cloud(path: &Path, format: Option<CloudFormat>) -> Result<PointCloud, CloudError> {
    let format = match format {
        Some(f) => f,
        None => CloudFormat::from_path(path)?,
    };
    let bytes = std::fs::read(path)?;
    match format {
        CloudFormat::Ply => parse_ply(&bytes),
        CloudFormat::Xyz => parse_xyz(&bytes),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Ascii,
    BinaryLe,
}

struct Header {
    encoding: Encoding,
    elements: Vec<Element>,
    body_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header, CloudError> {
    let mut pos = 0;
    let next_line = |pos: &mut usize| -> Result<(usize, String), CloudError> {
        let start = *pos;
        let rel = bytes[start..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| CloudError::parse(start, "header not terminated by end_header"))?;
        *pos = start + rel + 1;
        let line = std::str::from_utf8(&bytes[start..start + rel])
            .map_err(|_| CloudError::parse(start, "header is not valid UTF-8"))?;
        Ok((start, line.trim_end_matches('\r').trim().to_string()))
    };

    let (off, magic) = next_line(&mut pos)?;
    if magic != "ply" {
        return Err(CloudError::parse(off, "missing 'ply' magic"));
    }
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let (off, line) = next_line(&mut pos)?;
        let mut words = line.split_whitespace();
        match words.next() {
            Some("format") => {
                let kind = words.next().unwrap_or_default();
                if words.next() != Some("1.0") {
                    return Err(CloudError::parse(off, "unsupported PLY version"));
                }
                encoding = Some(match kind {
                    "ascii" => Encoding::Ascii,
                    "binary_little_endian" => Encoding::BinaryLe,
                    other => return Err(CloudError::parse(off, format!("unsupported format '{other}'"))),
                });
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                let name = words.next().ok_or_else(|| CloudError::parse(off, "element without name"))?;
                let count = words
                    .next()
                    .and_then(|c| c.parse::<usize>().ok())
                    .ok_or_else(|| CloudError::parse(off, "element count is not a non-negative integer"))?;
                elements.push(Element { name: name.to_string(), count, properties: Vec::new() });
            }
            Some("property") => {
                let element =
                    elements.last_mut().ok_or_else(|| CloudError::parse(off, "property before any element"))?;
                let first = words.next().unwrap_or_default();
                let property = if first == "list" {
                    let count = words.next().and_then(Scalar::parse);
                    let item = words.next().and_then(Scalar::parse);
                    match (count, item, words.next()) {
                        (Some(count), Some(item), Some(_)) => Property::List { count, item },
                        _ => return Err(CloudError::parse(off, "malformed list property")),
                    }
                } else {
                    let ty = Scalar::parse(first)
                        .ok_or_else(|| CloudError::parse(off, format!("unknown property type '{first}'")))?;
                    let name = words.next().ok_or_else(|| CloudError::parse(off, "property without name"))?;
                    Property::Scalar { name: name.to_string(), ty }
                };
                element.properties.push(property);
            }
            Some("end_header") => break,
            Some(other) => return Err(CloudError::parse(off, format!("unexpected header keyword '{other}'"))),
        }
    }
    let encoding = encoding.ok_or_else(|| CloudError::parse(0, "missing format line"))?;
    Ok(Header { encoding, elements, body_start: pos })
}

/// Positions of x, y, z within the vertex element's property list.
fn coordinate_slots(element: &Element, header_offset: usize) -> Result<[usize; 3], CloudError> {
    let mut slots = [usize::MAX; 3];
    for (i, prop) in element.properties.iter().enumerate() {
        if let Property::Scalar { name, ty } = prop {
            let axis = match name.as_str() {
                "x" => 0,
                "y" => 1,
                "z" => 2,
                _ => continue,
            };
            if !matches!(ty, Scalar::F32 | Scalar::F64) {
                return Err(CloudError::parse(
                    header_offset,
                    format!("vertex property '{name}' must be float or double"),
                ));
            }
            slots[axis] = i;
        }
    }
    if slots.contains(&usize::MAX) {
        return Err(CloudError::parse(header_offset, "vertex element lacks x, y or z"));
    }
    Ok(slots)
}

/// Parses a complete PLY file held in memory.
pub fn parse_ply(bytes: &[u8]) -> Result<PointCloud, CloudError> {
    let header = parse_header(bytes)?;
    let vertex_pos = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| CloudError::parse(0, "no vertex element"))?;
    let slots = coordinate_slots(&header.elements[vertex_pos], 0)?;
    let points = match header.encoding {
        Encoding::Ascii => read_ascii_body(bytes, &header, vertex_pos, slots)?,
        Encoding::BinaryLe => read_binary_body(bytes, &header, vertex_pos, slots)?,
    };
    Ok(PointCloud { points })
}

struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Result<(usize, &'a str), CloudError> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(CloudError::parse(start, "unexpected end of data"));
        }
        let tok = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| CloudError::parse(start, "invalid UTF-8 in ASCII body"))?;
        Ok((start, tok))
    }

    fn number(&mut self) -> Result<(usize, f64), CloudError> {
        let (off, tok) = self.next()?;
        let v = tok.parse::<f64>().map_err(|_| CloudError::parse(off, format!("'{tok}' is not a number")))?;
        Ok((off, v))
    }
}

fn read_ascii_body(
    bytes: &[u8],
    header: &Header,
    vertex_pos: usize,
    slots: [usize; 3],
) -> Result<Vec<LocalPoint>, CloudError> {
    let mut tokens = Tokens { bytes, pos: header.body_start };
    let mut points = Vec::new();
    for (ei, element) in header.elements.iter().enumerate().take(vertex_pos + 1) {
        let is_vertex = ei == vertex_pos;
        if is_vertex {
            points.reserve(element.count);
        }
        for _ in 0..element.count {
            let mut xyz = [0.0; 3];
            for (pi, prop) in element.properties.iter().enumerate() {
                match prop {
                    Property::Scalar { .. } => {
                        let (off, v) = tokens.number()?;
                        if is_vertex {
                            if let Some(axis) = slots.iter().position(|&s| s == pi) {
                                if !v.is_finite() {
                                    return Err(CloudError::parse(off, "non-finite coordinate"));
                                }
                                xyz[axis] = v;
                            }
                        }
                    }
                    Property::List { .. } => {
                        let (off, n) = tokens.number()?;
                        if n < 0.0 || n.fract() != 0.0 {
                            return Err(CloudError::parse(off, "invalid list length"));
                        }
                        for _ in 0..n as usize {
                            tokens.number()?;
                        }
                    }
                }
            }
            if is_vertex {
                points.push(xyz.into());
            }
        }
    }
    Ok(points)
}

fn read_binary_body(
    bytes: &[u8],
    header: &Header,
    vertex_pos: usize,
    slots: [usize; 3],
) -> Result<Vec<LocalPoint>, CloudError> {
    let mut pos = header.body_start;
    let take = |pos: &mut usize, n: usize| -> Result<usize, CloudError> {
        if *pos + n > bytes.len() {
            return Err(CloudError::parse(*pos, "truncated binary payload"));
        }
        let start = *pos;
        *pos += n;
        Ok(start)
    };
    // Skip elements that precede the vertices.
    for element in &header.elements[..vertex_pos] {
        for _ in 0..element.count {
            for prop in &element.properties {
                match *prop {
                    Property::Scalar { ty, .. } => {
                        take(&mut pos, ty.size())?;
                    }
                    Property::List { count, item } => {
                        let at = take(&mut pos, count.size())?;
                        let n = count.read_le(&bytes[at..]);
                        if n < 0.0 {
                            return Err(CloudError::parse(at, "negative list length"));
                        }
                        take(&mut pos, n as usize * item.size())?;
                    }
                }
            }
        }
    }

    let vertex = &header.elements[vertex_pos];
    let mut points = Vec::with_capacity(vertex.count);
    let fixed: Option<Vec<Scalar>> = vertex
        .properties
        .iter()
        .map(|p| match p {
            Property::Scalar { ty, .. } => Some(*ty),
            Property::List { .. } => None,
        })
        .collect();

    if let Some(types) = fixed {
        let mut offsets = Vec::with_capacity(types.len());
        let mut stride = 0;
        for t in &types {
            offsets.push(stride);
            stride += t.size();
        }
        let needed = stride * vertex.count;
        if pos + needed > bytes.len() {
            let complete = (bytes.len() - pos) / stride.max(1);
            return Err(CloudError::parse(pos + complete * stride, "truncated binary payload"));
        }
        for (i, record) in bytes[pos..pos + needed].chunks_exact(stride).enumerate() {
            let mut xyz = [0.0; 3];
            for axis in 0..3 {
                let s = slots[axis];
                let v = types[s].read_le(&record[offsets[s]..]);
                if !v.is_finite() {
                    return Err(CloudError::parse(pos + i * stride + offsets[s], "non-finite coordinate"));
                }
                xyz[axis] = v;
            }
            points.push(xyz.into());
        }
        return Ok(points);
    }

    for _ in 0..vertex.count {
        let mut xyz = [0.0; 3];
        for (pi, prop) in vertex.properties.iter().enumerate() {
            match *prop {
                Property::Scalar { ty, .. } => {
                    let at = take(&mut pos, ty.size())?;
                    if let Some(axis) = slots.iter().position(|&s| s == pi) {
                        let v = ty.read_le(&bytes[at..]);
                        if !v.is_finite() {
                            return Err(CloudError::parse(at, "non-finite coordinate"));
                        }
                        xyz[axis] = v;
                    }
                }
                Property::List { count, item } => {
                    let at = take(&mut pos, count.size())?;
                    let n = count.read_le(&bytes[at..]);
                    if n < 0.0 {
                        return Err(CloudError::parse(at, "negative list length"));
                    }
                    take(&mut pos, n as usize * item.size())?;
                }
            }
        }
        points.push(xyz.into());
    }
    Ok(points)
}

/// Parses whitespace-separated XYZ text. Blank lines and `#` comments are skipped.
pub fn parse_xyz(bytes: &[u8]) -> Result<PointCloud, CloudError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CloudError::parse(e.valid_up_to(), "invalid UTF-8"))?;
    let mut points = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let content = line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut xyz = [0.0; 3];
        let mut fields = content.split_whitespace();
        for v in xyz.iter_mut() {
            let tok = fields.next().ok_or_else(|| CloudError::parse(start, "expected three coordinates"))?;
            *v = tok.parse::<f64>().map_err(|_| CloudError::parse(start, format!("'{tok}' is not a number")))?;
            if !v.is_finite() {
                return Err(CloudError::parse(start, "non-finite coordinate"));
            }
        }
        points.push(xyz.into());
    }
    Ok(PointCloud { points })
}

/// Writes binary little-endian PLY with `double` coordinates.
pub fn write_ply_binary<W: Write>(cloud: &PointCloud, mut out: W) -> std::io::Result<()> {
    write!(
        out,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        cloud.count()
    )?;
    let mut buf = Vec::with_capacity(cloud.count() * 24);
    for p in cloud.points() {
        buf.extend_from_slice(&p.x.to_le_bytes());
        buf.extend_from_slice(&p.y.to_le_bytes());
        buf.extend_from_slice(&p.z.to_le_bytes());
    }
    out.write_all(&buf)
}

/// Writes ASCII PLY using shortest round-trip decimal formatting.
pub fn write_ply_ascii<W: Write>(cloud: &PointCloud, mut out: W) -> std::io::Result<()> {
    write!(
        out,
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        cloud.count()
    )?;
    for p in cloud.points() {
        writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
    }
    Ok(())
}
