use crate::error::{Error, Result};

/// Undirected binary peer network over `n` respondents.
///
/// Stored as a dense row-major `n x n` matrix of 0/1 entries. Construction
/// rejects asymmetric input, self-edges and non-binary entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkData {
    n: usize,
    adjacency: Vec<u8>,
}

impl NetworkData {
    pub fn from_adjacency(n: usize, adjacency: Vec<u8>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidData("network must have at least one respondent".into()));
        }
        if adjacency.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "adjacency has {} entries, expected {}x{}",
                adjacency.len(),
                n,
                n
            )));
        }
        for k in 0..n {
            if adjacency[k * n + k] != 0 {
                return Err(Error::InvalidData(format!("self-edge at respondent {k}")));
            }
            for l in 0..n {
                let v = adjacency[k * n + l];
                if v > 1 {
                    return Err(Error::InvalidData(format!("entry ({k},{l}) = {v} is not binary")));
                }
                if v != adjacency[l * n + k] {
                    return Err(Error::InvalidData(format!("adjacency not symmetric at ({k},{l})")));
                }
            }
        }
        Ok(Self { n, adjacency })
    }

    /// Builds a network from undirected 0-based edges. Duplicates are merged;
    /// self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidData("network must have at least one respondent".into()));
        }
        let mut adjacency = vec![0u8; n * n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidData(format!("edge ({a},{b}) out of range for n={n}")));
            }
            if a == b {
                return Err(Error::InvalidData(format!("self-edge at respondent {a}")));
            }
            adjacency[a * n + b] = 1;
            adjacency[b * n + a] = 1;
        }
        Ok(Self { n, adjacency })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::from_edges(n, &[])
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut adjacency = vec![1u8; n * n];
        for k in 0..n {
            adjacency[k * n + k] = 0;
        }
        Self::from_adjacency(n, adjacency)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, k: usize, l: usize) -> bool {
        self.adjacency[k * self.n + l] == 1
    }

    #[inline]
    pub fn row(&self, k: usize) -> &[u8] {
        &self.adjacency[k * self.n..(k + 1) * self.n]
    }

    pub fn adjacency(&self) -> &[u8] {
        &self.adjacency
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|&v| v as usize).sum::<usize>() / 2
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n)
            .map(|k| self.row(k).iter().map(|&v| v as usize).sum())
            .collect()
    }

    /// Undirected edges as 0-based pairs with `k < l`, in row order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for k in 0..self.n {
            for l in (k + 1)..self.n {
                if self.has_edge(k, l) {
                    out.push((k, l));
                }
            }
        }
        out
    }

    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.edge_count() as f64 / (self.n * (self.n - 1) / 2) as f64
    }
}

/// `n x p` binary item response matrix, respondents in rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemResponseData {
    n: usize,
    p: usize,
    responses: Vec<u8>,
}

impl ItemResponseData {
    pub fn new(n: usize, p: usize, responses: Vec<u8>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidData("response matrix must be non-empty".into()));
        }
        if responses.len() != n * p {
            return Err(Error::DimensionMismatch(format!(
                "response matrix has {} entries, expected {}x{}",
                responses.len(),
                n,
                p
            )));
        }
        if let Some(pos) = responses.iter().position(|&v| v > 1) {
            return Err(Error::InvalidData(format!(
                "response ({},{}) = {} is not binary",
                pos / p,
                pos % p,
                responses[pos]
            )));
        }
        Ok(Self { n, p, responses })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize) -> bool {
        self.responses[k * self.p + i] == 1
    }

    #[inline]
    pub fn row(&self, k: usize) -> &[u8] {
        &self.responses[k * self.p..(k + 1) * self.p]
    }

    pub fn responses(&self) -> &[u8] {
        &self.responses
    }

    /// Checks that this matrix pairs with a network over the same respondents.
    pub fn check_paired(&self, net: &NetworkData) -> Result<()> {
        if self.n != net.n() {
            return Err(Error::DimensionMismatch(format!(
                "network has {} respondents but response matrix has {}",
                net.n(),
                self.n
            )));
        }
        Ok(())
    }
}
