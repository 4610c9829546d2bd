//! CGT1 tensor container.
//!
//! Layout: magic `CGT1`, little-endian `u32` width, height and channel count,
//! then per channel a 4-byte ASCII tag (space padded) followed by
//! `width · height` little-endian `f32` values in row-major order.

use std::path::Path;

use omnigeom_core::camera_tensor::{CameraTensor, Channel};
use omnigeom_core::geometry_warp::DistanceMap;
use omnigeom_core::polygon_repr::InstanceMask;
use omnigeom_core::Grid;

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"CGT1";
pub const DISTANCE_TAG: &str = "dst";
pub const MASK_TAG: &str = "msk";

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let slice = self
            .at
            .checked_add(len)
            .and_then(|end| self.bytes.get(self.at..end))
            .ok_or_else(|| {
                CliError::input(format!("truncated CGT1 data: {what} at offset {}", self.at))
            })?;
        self.at += len;
        Ok(slice)
    }

    fn word(&mut self, what: &str) -> Result<usize> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub width: usize,
    pub height: usize,
    pub channels: Vec<(String, Vec<f32>)>,
}

fn pad_tag(tag: &str) -> Result<[u8; 4]> {
    let bytes = tag.as_bytes();
    if bytes.is_empty() || bytes.len() > 4 || !bytes.iter().all(|b| b.is_ascii_graphic()) {
        return Err(CliError::input(format!("invalid channel tag '{tag}'")));
    }
    let mut out = [b' '; 4];
    out[..bytes.len()].copy_from_slice(bytes);
    Ok(out)
}

impl Container {
    pub fn from_grids<'a>(channels: impl IntoIterator<Item = (&'a str, &'a Grid)>) -> Result<Self> {
        let mut dims = None;
        let mut out = Vec::new();
        for (tag, grid) in channels {
            if *dims.get_or_insert(grid.dims()) != grid.dims() {
                return Err(CliError::input("container channels differ in size"));
            }
            pad_tag(tag)?;
            out.push((
                tag.to_string(),
                grid.data().iter().map(|&v| v as f32).collect(),
            ));
        }
        let (width, height) =
            dims.ok_or_else(|| CliError::input("container needs at least one channel"))?;
        Ok(Self {
            width,
            height,
            channels: out,
        })
    }

    pub fn grid(&self, index: usize) -> Result<Grid> {
        let (_, data) = &self.channels[index];
        Ok(Grid::from_vec(
            self.width,
            self.height,
            data.iter().map(|&v| v as f64).collect(),
        )?)
    }

    pub fn find(&self, tag: &str) -> Option<usize> {
        self.channels.iter().position(|(t, _)| t == tag)
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let n = self.width * self.height;
        let mut out = Vec::with_capacity(16 + self.channels.len() * (4 + 4 * n));
        out.extend_from_slice(MAGIC);
        for v in [self.width, self.height, self.channels.len()] {
            let v =
                u32::try_from(v).map_err(|_| CliError::input("container dimension exceeds u32"))?;
            out.extend_from_slice(&v.to_le_bytes());
        }
        for (tag, data) in &self.channels {
            if data.len() != n {
                return Err(CliError::input(format!(
                    "channel '{tag}' has {} values, expected {n}",
                    data.len()
                )));
            }
            out.extend_from_slice(&pad_tag(tag)?);
            for v in data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, at: 0 };
        if r.take(4, "magic")? != MAGIC {
            return Err(CliError::input("not a CGT1 file: bad magic at offset 0"));
        }
        let width = r.word("width")?;
        let height = r.word("height")?;
        let count = r.word("channel count")?;
        let n = width
            .checked_mul(height)
            .ok_or_else(|| CliError::input("CGT1 dimensions overflow"))?;
        let mut channels = Vec::with_capacity(count.min(64));
        for c in 0..count {
            let offset = r.at;
            let raw = r.take(4, "channel tag")?;
            let tag = std::str::from_utf8(raw)
                .ok()
                .filter(|t| t.bytes().all(|b| b.is_ascii_graphic() || b == b' '))
                .map(|t| t.trim_end_matches(' ').to_string())
                .filter(|t| !t.is_empty())
                .ok_or_else(|| {
                    CliError::input(format!("invalid tag for channel {c} at offset {offset}"))
                })?;
            let body = r.take(4 * n, "channel data")?;
            let data = body
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            channels.push((tag, data));
        }
        if r.at != bytes.len() {
            return Err(CliError::input(format!(
                "trailing bytes after CGT1 data at offset {}",
                r.at
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()?).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes =
            std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Self::decode(&bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }
}

pub fn tensor_container(t: &CameraTensor) -> Container {
    Container::from_grids(Channel::ALL.iter().map(|&c| (c.tag(), t.channel(c))))
        .expect("tensor channels share dims")
}

pub fn container_tensor(c: &Container) -> Result<CameraTensor> {
    if c.channels.len() != 6 {
        return Err(CliError::input(format!(
            "camera tensor needs 6 channels, found {}",
            c.channels.len()
        )));
    }
    let mut grids = Vec::with_capacity(6);
    for (i, ch) in Channel::ALL.iter().enumerate() {
        if c.channels[i].0 != ch.tag() {
            return Err(CliError::input(format!(
                "channel {i} has tag '{}', expected '{}'",
                c.channels[i].0,
                ch.tag()
            )));
        }
        grids.push(c.grid(i)?);
    }
    let grids: [Grid; 6] = grids.try_into().expect("six channels");
    Ok(CameraTensor::from_channels(grids)?)
}

pub fn distance_container(d: &DistanceMap) -> Container {
    Container::from_grids([(DISTANCE_TAG, d.grid())]).expect("one channel")
}

pub fn container_distance(c: &Container) -> Result<DistanceMap> {
    let i = c
        .find(DISTANCE_TAG)
        .ok_or_else(|| CliError::input("container has no 'dst' channel"))?;
    Ok(DistanceMap::new(c.grid(i)?)?)
}

pub fn mask_container(m: &InstanceMask) -> Container {
    Container::from_grids([(MASK_TAG, &m.to_grid())]).expect("one channel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid::from_fn(5, 3, |x, y| (x as f64 - 1.7) * 0.3 + y as f64 * 1e-7);
        let h = g.map(|v| -v);
        let c = Container::from_grids([("ab", &g), ("abcd", &h)]).unwrap();
        let bytes = c.encode().unwrap();
        assert_eq!(&bytes[..4], b"CGT1");
        assert_eq!(&bytes[16..20], b"ab  ");
        let back = Container::decode(&bytes).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.encode().unwrap(), bytes);
    }

    #[test]
    fn decode_errors_name_offsets() {
        let g = Grid::zeros(2, 2);
        let bytes = Container::from_grids([("dst", &g)])
            .unwrap()
            .encode()
            .unwrap();
        let err = Container::decode(&bytes[..bytes.len() - 1]).unwrap_err();
        assert!(err.to_string().contains("offset 20"), "{err}");
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Container::decode(&bad)
            .unwrap_err()
            .to_string()
            .contains("magic"));
        let mut long = bytes;
        long.push(0);
        assert!(Container::decode(&long).is_err());
        assert!(Container::from_grids([("toolong", &g)]).is_err());
    }
}
