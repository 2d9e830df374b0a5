use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the total width of any dense state.
pub const MAX_QUBITS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub width: usize,
}

/// Ordered named qubit registers. The first register occupies the most
/// significant qubit positions of the basis index (big-endian).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    registers: Vec<Register>,
}

impl RegisterLayout {
    pub fn new<I, S>(registers: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut layout = Self::default();
        for (name, width) in registers {
            layout.push(name, width)?;
        }
        Ok(layout)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, width: usize) -> Result<()> {
        let name = name.into();
        if width == 0 {
            return Err(Error::InvalidWidth(name));
        }
        self.push_register(Register { name, width })
    }

    /// Declares a workspace that holds no qubits.
    pub fn push_empty(&mut self, name: impl Into<String>) -> Result<()> {
        self.push_register(Register { name: name.into(), width: 0 })
    }

    fn push_register(&mut self, reg: Register) -> Result<()> {
        if reg.name.is_empty() {
            return Err(Error::InvalidWidth(reg.name));
        }
        if self.contains(&reg.name) {
            return Err(Error::DuplicateRegister(reg.name));
        }
        let requested = self.width() + reg.width;
        if requested > MAX_QUBITS {
            return Err(Error::WidthCap { requested, cap: MAX_QUBITS });
        }
        self.registers.push(reg);
        Ok(())
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.registers.iter().map(|r| r.name.as_str())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.registers.iter().any(|r| r.name == name)
    }

    pub fn width(&self) -> usize {
        self.registers.iter().map(|r| r.width).sum()
    }

    pub fn dim(&self) -> usize {
        1 << self.width()
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    /// First qubit position and width of a register.
    pub fn span(&self, name: &str) -> Result<(usize, usize)> {
        let mut start = 0;
        for r in &self.registers {
            if r.name == name {
                return Ok((start, r.width));
            }
            start += r.width;
        }
        Err(Error::UnknownRegister(name.to_string()))
    }

    /// Qubit positions of the named registers, in the order given.
    pub fn qubits_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        let mut qubits = Vec::new();
        for (i, name) in names.iter().enumerate() {
            let name = name.as_ref();
            if names[..i].iter().any(|n| n.as_ref() == name) {
                return Err(Error::DuplicateRegister(name.to_string()));
            }
            let (start, width) = self.span(name)?;
            qubits.extend(start..start + width);
        }
        Ok(qubits)
    }

    /// Layout of the named registers, kept in this layout's order.
    pub fn sub_layout<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        for n in names {
            self.register(n.as_ref())?;
        }
        let registers = self
            .registers
            .iter()
            .filter(|r| names.iter().any(|n| n.as_ref() == r.name))
            .cloned()
            .collect();
        Ok(Self { registers })
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for r in &other.registers {
            out.push_register(r.clone())?;
        }
        Ok(out)
    }
}

/// For each sub-index over `qubits` (big-endian in the order given), the
/// bits it contributes to a full basis index of a `width`-qubit state.
pub(crate) fn scatter_offsets(width: usize, qubits: &[usize]) -> Vec<usize> {
    let m = qubits.len();
    let mut out = vec![0usize; 1 << m];
    for (j, &q) in qubits.iter().enumerate() {
        let src = 1usize << (m - 1 - j);
        let dst = 1usize << (width - 1 - q);
        for (s, slot) in out.iter_mut().enumerate() {
            if s & src != 0 {
                *slot |= dst;
            }
        }
    }
    out
}

/// Qubit positions of a `width`-qubit state not listed in `qubits`.
pub(crate) fn complement(width: usize, qubits: &[usize]) -> Vec<usize> {
    (0..width).filter(|q| !qubits.contains(q)).collect()
}

/// Reads the sub-index over `qubits` out of a full basis index.
pub(crate) fn gather_index(full: usize, width: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .fold(0usize, |acc, &q| (acc << 1) | ((full >> (width - 1 - q)) & 1))
}

/// Qubits needed to hold `size` distinct values (at least one).
pub fn qubits_for(size: usize) -> usize {
    let mut w = 0;
    while (1usize << w) < size {
        w += 1;
    }
    w.max(1)
}
