//! Finitely supported measures on `R^d`.

/// A finite weighted collection of atoms in `R^d`, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    /// Concatenated coordinates, `atom_count * dim` entries.
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, positions: Vec<f64>, weights: Vec<f64>) -> Self {
        assert_eq!(positions.len(), weights.len() * dim);
        Self {
            dim,
            positions,
            weights,
        }
    }

    /// Equal-weight empirical measure of `points`, total mass one.
    pub fn empirical(dim: usize, positions: Vec<f64>) -> Self {
        assert_eq!(positions.len() % dim.max(1), 0);
        let n = positions.len() / dim;
        Self {
            dim,
            positions,
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// A single unit atom.
    pub fn dirac(point: &[f64]) -> Self {
        Self {
            dim: point.len(),
            positions: point.to_vec(),
            weights: vec![1.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn atom(&self, i: usize) -> (&[f64], f64) {
        (
            &self.positions[i * self.dim..(i + 1) * self.dim],
            self.weights[i],
        )
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.positions
            .chunks_exact(self.dim)
            .zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mass of the closed Euclidean ball `B(center, radius)`.
    pub fn ball_mass(&self, center: &[f64], radius: f64) -> f64 {
        assert_eq!(center.len(), self.dim);
        let r2 = radius * radius;
        self.atoms()
            .filter(|(x, _)| {
                x.iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    <= r2
            })
            .map(|(_, w)| w)
            .sum()
    }

    /// `int f dmu`.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms().map(|(x, w)| w * f(x)).sum()
    }

    /// Pushforward under a map of points.
    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let mut positions = Vec::with_capacity(self.positions.len());
        for (x, _) in self.atoms() {
            let y = f(x);
            assert_eq!(y.len(), self.dim);
            positions.extend(y);
        }
        Self {
            dim: self.dim,
            positions,
            weights: self.weights.clone(),
        }
    }
}
