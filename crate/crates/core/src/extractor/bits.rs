use std::io::{self, Read, Write};

/// Packed bit string. Bit `k` lives in word `k / 64` at position `k % 64`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Option<Self> {
        let bits: Option<Vec<bool>> = s
            .chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        bits.map(|b| Self::from_bits(&b))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn push(&mut self, v: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, v);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len);
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
            len: self.len,
        }
    }

    /// 64 bits starting at `offset`, zero-padded past the end.
    pub(crate) fn window(&self, offset: usize) -> u64 {
        let (w, s) = (offset / 64, offset % 64);
        let lo = self.words.get(w).copied().unwrap_or(0);
        if s == 0 {
            lo
        } else {
            let hi = self.words.get(w + 1).copied().unwrap_or(0);
            (lo >> s) | (hi << (64 - s))
        }
    }

    /// Little-endian packed bytes: bit `k` is bit `k % 8` of byte `k / 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        self.words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(n)
            .collect()
    }

    /// Inverse of [`to_bytes`](Self::to_bytes); bits past `len` are ignored.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Option<Self> {
        if bytes.len() < len.div_ceil(8) {
            return None;
        }
        let mut s = Self::zeros(len);
        for (i, chunk) in bytes[..len.div_ceil(8)].chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            s.words[i] = u64::from_le_bytes(buf);
        }
        s.clear_tail();
        Some(s)
    }

    fn clear_tail(&mut self) {
        if !self.len.is_multiple_of(64) {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << (self.len % 64)) - 1;
            }
        }
    }

    /// Stream format: `u64` little-endian bit length, then the packed bytes.
    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(&(self.len as u64).to_le_bytes())?;
        w.write_all(&self.to_bytes())
    }

    pub fn read_from(mut r: impl Read) -> io::Result<Self> {
        let mut head = [0u8; 8];
        r.read_exact(&mut head)?;
        let len = usize::try_from(u64::from_le_bytes(head))
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "bit length overflows"))?;
        let mut body = vec![0u8; len.div_ceil(8)];
        r.read_exact(&mut body)
            .map_err(|_| io::Error::new(io::ErrorKind::UnexpectedEof, "bit stream shorter than its header"))?;
        Ok(Self::from_bytes(&body, len).expect("body sized from header"))
    }

    /// First `len` bits.
    pub fn truncated(&self, len: usize) -> Self {
        assert!(len <= self.len);
        let mut s = Self {
            words: self.words[..len.div_ceil(64)].to_vec(),
            len,
        };
        s.clear_tail();
        s
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut s = BitString::default();
        for b in iter {
            s.push(b);
        }
        s
    }
}
