//! Price history ingestion and the mean-variance QUBO.

use std::path::Path;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};

use crate::qubo::QuboMatrix;
use crate::{Error, Result};

pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;
pub const DEFAULT_RISK_AVERSION: f64 = 0.5;

/// Tolerance on the smallest eigenvalue of an annualized covariance.
const PSD_TOLERANCE: f64 = 1e-8;

/// Gap-filled adjusted closing prices, one column per asset.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub asset_ids: Vec<String>,
    pub dates: Vec<NaiveDate>,
    /// `dates.len() × asset_ids.len()`.
    pub prices: DMatrix<f64>,
}

impl PriceSeries {
    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    /// First `k` assets in column order.
    pub fn leading_assets(&self, k: usize) -> Result<Self> {
        if k > self.n_assets() {
            return Err(Error::Data(format!(
                "{k} assets required but only {} available",
                self.n_assets()
            )));
        }
        Ok(Self {
            asset_ids: self.asset_ids[..k].to_vec(),
            dates: self.dates.clone(),
            prices: self.prices.columns(0, k).into_owned(),
        })
    }
}

/// Annualized mean returns and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnStatistics {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
}

impl ReturnStatistics {
    /// Checks shape, symmetry and positive semidefiniteness of `sigma`.
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let stats = Self { mu, sigma };
        stats.check_shape()?;
        let n = stats.mu.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (stats.sigma[(i, j)], stats.sigma[(j, i)]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvariantViolation(format!(
                        "covariance not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if n > 0 {
            let smallest = stats.sigma.clone().symmetric_eigenvalues().min();
            if smallest < -PSD_TOLERANCE {
                return Err(Error::InvariantViolation(format!(
                    "covariance has eigenvalue {smallest:e} below -{PSD_TOLERANCE:e}"
                )));
            }
        }
        Ok(stats)
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.mu.len();
        if self.sigma.nrows() != n || self.sigma.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "mu has {n} entries but sigma is {}x{}",
                self.sigma.nrows(),
                self.sigma.ncols()
            )));
        }
        Ok(())
    }
}

/// Reads a `date,TICKER1,TICKER2,...` CSV. Empty cells are missing prices.
///
/// Dates on which every asset is missing are dropped. Each asset is then
/// forward filled, and any leading gap is back filled from the first
/// observation.
pub fn load_prices(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    parse_prices(file)
}

pub fn parse_prices(reader: impl std::io::Read) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    if header.len() < 2 || !header[0].eq_ignore_ascii_case("date") {
        return Err(Error::Format(
            "header must be `date,TICKER1,...` with at least one asset".into(),
        ));
    }
    let asset_ids: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let n = asset_ids.len();

    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut raw: Vec<Vec<Option<f64>>> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Format(e.to_string()))?;
        let row_no = line + 2;
        if record.len() != n + 1 {
            return Err(Error::Format(format!(
                "line {row_no}: expected {} fields, got {}",
                n + 1,
                record.len()
            )));
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|_| Error::Format(format!("line {row_no}: bad date {:?}", &record[0])))?;
        if let Some(&prev) = dates.last() {
            if date <= prev {
                return Err(Error::Format(format!(
                    "line {row_no}: date {date} is not after {prev}"
                )));
            }
        }
        let cells = record
            .iter()
            .skip(1)
            .zip(&asset_ids)
            .map(|(cell, asset)| {
                if cell.is_empty() {
                    return Ok(None);
                }
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Format(format!("line {row_no}: bad price {cell:?} for {asset}"))
                })?;
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Data(format!(
                        "line {row_no}: price {v} for {asset} is not positive"
                    )));
                }
                Ok(Some(v))
            })
            .collect::<Result<Vec<_>>>()?;
        if cells.iter().all(Option::is_none) {
            continue;
        }
        dates.push(date);
        raw.push(cells);
    }

    let t = dates.len();
    let mut prices = DMatrix::zeros(t, n);
    for (a, asset) in asset_ids.iter().enumerate() {
        let column: Vec<Option<f64>> = raw.iter().map(|row| row[a]).collect();
        let filled = fill_gaps(&column)
            .ok_or_else(|| Error::Data(format!("asset {asset} has no prices")))?;
        for (row, v) in filled.into_iter().enumerate() {
            prices[(row, a)] = v;
        }
    }
    Ok(PriceSeries {
        asset_ids,
        dates,
        prices,
    })
}

/// Forward fill, then back fill the leading gap. `None` if nothing observed.
fn fill_gaps(column: &[Option<f64>]) -> Option<Vec<f64>> {
    let first = column.iter().flatten().next().copied()?;
    let mut last = first;
    Some(
        column
            .iter()
            .map(|cell| {
                if let Some(v) = cell {
                    last = *v;
                }
                last
            })
            .collect(),
    )
}

/// Daily log returns `ln(P_t / P_{t-1})`, shape `(T-1) × n`.
pub fn log_returns(ps: &PriceSeries) -> Result<DMatrix<f64>> {
    let t = ps.prices.nrows();
    if t < 2 {
        return Err(Error::InsufficientData { needed: 2, got: t });
    }
    Ok(DMatrix::from_fn(t - 1, ps.prices.ncols(), |row, a| {
        (ps.prices[(row + 1, a)] / ps.prices[(row, a)]).ln()
    }))
}

/// Column means and unbiased sample covariance, both scaled by 252.
pub fn annualize(returns: &DMatrix<f64>) -> Result<ReturnStatistics> {
    let rows = returns.nrows();
    if rows < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: rows,
        });
    }
    let n = returns.ncols();
    let means: Vec<f64> = (0..n).map(|a| returns.column(a).mean()).collect();
    let centered = DMatrix::from_fn(rows, n, |r, a| returns[(r, a)] - means[a]);
    let mut sigma = centered.transpose() * &centered;
    sigma *= TRADING_DAYS_PER_YEAR / (rows - 1) as f64;
    // The product is symmetric up to rounding; make it exact.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (sigma[(i, j)] + sigma[(j, i)]);
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    let mu = DVector::from_iterator(n, means.into_iter().map(|m| m * TRADING_DAYS_PER_YEAR));
    ReturnStatistics::new(mu, sigma)
}

/// `Q_ii = -mu_i + gamma * sigma_ii`, `Q_ij = gamma * sigma_ij`.
pub fn build_markowitz_qubo(stats: &ReturnStatistics, gamma: f64) -> Result<QuboMatrix> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "risk aversion must be finite and >= 0, got {gamma}"
        )));
    }
    stats.check_shape()?;
    let n = stats.mu.len();
    let flat = (0..n)
        .flat_map(|i| {
            (0..n).map(move |j| {
                let risk = gamma * stats.sigma[(i, j)];
                if i == j {
                    risk - stats.mu[i]
                } else {
                    risk
                }
            })
        })
        .collect();
    QuboMatrix::from_flat(n, flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(cols: &[&[f64]]) -> PriceSeries {
        let t = cols[0].len();
        let start = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
        PriceSeries {
            asset_ids: (0..cols.len()).map(|i| format!("A{i}")).collect(),
            dates: (0..t)
                .map(|d| start + chrono::Days::new(d as u64))
                .collect(),
            prices: DMatrix::from_fn(t, cols.len(), |r, c| cols[c][r]),
        }
    }

    #[test]
    fn gap_filling() {
        assert_eq!(
            fill_gaps(&[Some(100.0), None, Some(102.0)]),
            Some(vec![100.0, 100.0, 102.0])
        );
        assert_eq!(
            fill_gaps(&[None, Some(50.0), Some(51.0)]),
            Some(vec![50.0, 50.0, 51.0])
        );
        assert_eq!(
            fill_gaps(&[Some(10.0), Some(11.0), Some(12.0)]),
            Some(vec![10.0, 11.0, 12.0])
        );
        assert_eq!(fill_gaps(&[None, None]), None);
    }

    #[test]
    fn csv_parsing_and_errors() {
        let csv =
            "date,AAA,BBB\n2021-01-04,100,\n2021-01-05,,50\n2021-01-06,,\n2021-01-07,102,51\n";
        let ps = parse_prices(csv.as_bytes()).unwrap();
        assert_eq!(ps.asset_ids, vec!["AAA", "BBB"]);
        // the all-missing date is dropped
        assert_eq!(ps.dates.len(), 3);
        assert_eq!(ps.prices.column(0).as_slice(), &[100.0, 100.0, 102.0]);
        assert_eq!(ps.prices.column(1).as_slice(), &[50.0, 50.0, 51.0]);

        let missing = "date,AAA,BBB\n2021-01-04,1,\n2021-01-05,2,\n";
        match parse_prices(missing.as_bytes()) {
            Err(Error::Data(msg)) => assert!(msg.contains("BBB")),
            other => panic!("expected data error, got {other:?}"),
        }
        let unordered = "date,AAA\n2021-01-05,1\n2021-01-04,2\n";
        assert!(matches!(
            parse_prices(unordered.as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            parse_prices("date,AAA\nnot-a-date,1\n".as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            parse_prices("date,AAA\n2021-01-04,abc\n".as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            parse_prices("ticker\n".as_bytes()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn log_return_examples() {
        let r = log_returns(&series(&[&[100.0, 100.0]])).unwrap();
        assert_eq!(r[(0, 0)], 0.0);
        let r = log_returns(&series(&[&[100.0, 100.0 * std::f64::consts::E]])).unwrap();
        assert!((r[(0, 0)] - 1.0).abs() < 1e-15);
        let r = log_returns(&series(&[&[100.0, 110.0, 100.0]])).unwrap();
        assert!(r.column(0).sum().abs() < 1e-15);
        assert!(matches!(
            log_returns(&series(&[&[100.0]])),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn annualize_examples() {
        let constant = DMatrix::from_element(5, 1, 0.001);
        let s = annualize(&constant).unwrap();
        assert!((s.mu[0] - 0.252).abs() < 1e-15);
        assert!(s.sigma[(0, 0)].abs() < 1e-20);

        let col = [0.01, -0.02, 0.005, 0.0];
        let twin = DMatrix::from_fn(4, 2, |r, _| col[r]);
        let s = annualize(&twin).unwrap();
        assert_eq!(s.sigma[(0, 1)], s.sigma[(0, 0)]);

        assert!(matches!(
            annualize(&DMatrix::zeros(1, 2)),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn independent_coin_flips_have_negligible_covariance() {
        let rows = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let r = DMatrix::from_fn(rows, 2, |_, _| if rng.gen::<bool>() { 0.01 } else { -0.01 });
        let s = annualize(&r).unwrap();
        // Standard error of a sample covariance of independent variables
        // with variance 1e-4 each is 1e-4 / sqrt(rows), annualized by 252.
        let se = 1e-4 / (rows as f64).sqrt() * 252.0;
        assert!(s.sigma[(0, 1)].abs() < 3.0 * se, "{}", s.sigma[(0, 1)]);
        assert!((s.sigma[(0, 0)] - 252e-4).abs() < 3.0 * 252e-4 * (2.0 / rows as f64).sqrt());
    }

    #[test]
    fn markowitz_examples() {
        let one = ReturnStatistics::new(
            DVector::from_vec(vec![0.1]),
            DMatrix::from_element(1, 1, 0.04),
        )
        .unwrap();
        let q = build_markowitz_qubo(&one, 0.5).unwrap();
        assert!((q.get(0, 0) + 0.08).abs() < 1e-15);

        let mu = DVector::from_vec(vec![0.2, -0.1]);
        let sigma = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, 0.2]);
        let q = build_markowitz_qubo(&ReturnStatistics::new(mu, sigma).unwrap(), 0.0).unwrap();
        assert_eq!((q.get(0, 0), q.get(1, 1), q.get(0, 1)), (-0.2, 0.1, 0.0));

        let pure = ReturnStatistics::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]),
        )
        .unwrap();
        let q = build_markowitz_qubo(&pure, 1.0).unwrap();
        assert_eq!(
            q,
            QuboMatrix::new(vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap()
        );
    }

    #[test]
    fn markowitz_rejects_bad_input() {
        let mismatched = ReturnStatistics {
            mu: DVector::zeros(2),
            sigma: DMatrix::zeros(3, 3),
        };
        assert!(matches!(
            build_markowitz_qubo(&mismatched, 0.5),
            Err(Error::InvalidArgument(_))
        ));
        let ok = ReturnStatistics::new(DVector::zeros(1), DMatrix::zeros(1, 1)).unwrap();
        assert!(build_markowitz_qubo(&ok, -1.0).is_err());
        assert!(ReturnStatistics::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn log_returns_telescope(prices in proptest::collection::vec(0.01f64..1e4, 2..40)) {
            let r = log_returns(&series(&[&prices])).unwrap();
            let total: f64 = r.column(0).iter().sum();
            let direct = (prices[prices.len() - 1] / prices[0]).ln();
            prop_assert!((total - direct).abs() < 1e-10);
        }

        #[test]
        fn markowitz_qubo_is_symmetric(seed in any::<u64>(), n in 1usize..6, gamma in 0.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = DMatrix::from_fn(30, n, |_, _| rng.gen_range(-0.05..0.05));
            let q = build_markowitz_qubo(&annualize(&r).unwrap(), gamma).unwrap();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(q.get(i, j), q.get(j, i));
                }
            }
        }
    }
}
