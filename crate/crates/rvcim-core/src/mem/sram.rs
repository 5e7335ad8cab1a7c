//! Word-addressed SRAM bank with a 32-bit core port and a wide CIM port
//! over the same backing bits.

use super::MemError;

#[derive(Debug, Clone)]
pub struct SramBank {
    name: &'static str,
    words: Vec<u32>,
}

impl SramBank {
    pub fn new(name: &'static str, words: usize) -> Self {
        SramBank { name, words: vec![0; words] }
    }

    pub fn len_words(&self) -> usize {
        self.words.len()
    }

    fn check(&self, addr: u32, count: usize) -> Result<usize, MemError> {
        let a = addr as usize;
        if a + count > self.words.len() {
            return Err(MemError::Bounds { bank: self.name, addr, words: self.words.len() });
        }
        Ok(a)
    }

    /// 32-bit core port read.
    pub fn read_word(&self, addr: u32) -> Result<u32, MemError> {
        let a = self.check(addr, 1)?;
        Ok(self.words[a])
    }

    /// 32-bit core port write.
    pub fn write_word(&mut self, addr: u32, value: u32) -> Result<(), MemError> {
        let a = self.check(addr, 1)?;
        self.words[a] = value;
        Ok(())
    }

    /// Wide-port read of `count` consecutive words.
    pub fn read_wide(&self, addr: u32, count: usize) -> Result<&[u32], MemError> {
        let a = self.check(addr, count)?;
        Ok(&self.words[a..a + count])
    }

    /// Wide-port write of consecutive words.
    pub fn write_wide(&mut self, addr: u32, values: &[u32]) -> Result<(), MemError> {
        let a = self.check(addr, values.len())?;
        self.words[a..a + values.len()].copy_from_slice(values);
        Ok(())
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    pub fn words_mut(&mut self) -> &mut [u32] {
        &mut self.words
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_then_read() {
        let mut b = SramBank::new("fm", 8192);
        b.write_word(17, 0xdead_beef).unwrap();
        assert_eq!(b.read_word(17).unwrap(), 0xdead_beef);
    }

    #[test]
    fn wide_port_is_coherent_with_narrow_port() {
        let mut b = SramBank::new("fm", 8192);
        for i in 0..8u32 {
            b.write_word(100 + i, i * 0x1111_1111).unwrap();
        }
        let wide: Vec<u32> = b.read_wide(100, 8).unwrap().to_vec();
        let narrow: Vec<u32> = (0..8).map(|i| b.read_word(100 + i).unwrap()).collect();
        assert_eq!(wide, narrow);

        b.write_wide(200, &wide).unwrap();
        for (i, w) in wide.iter().enumerate() {
            assert_eq!(b.read_word(200 + i as u32).unwrap(), *w);
        }
    }

    #[test]
    fn capacity_edge() {
        let mut b = SramBank::new("fm", 8192);
        assert!(b.write_word(8191, 1).is_ok());
        assert_eq!(
            b.write_word(8192, 1),
            Err(MemError::Bounds { bank: "fm", addr: 8192, words: 8192 })
        );
        assert!(b.read_wide(8185, 8).is_err());
    }
}
