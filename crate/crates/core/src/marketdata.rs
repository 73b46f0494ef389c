//! Historical prices and volumes: ingestion, returns, market temperature and
//! the fluctuation limit that places the well walls.

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::UnitSystem;

/// One trading day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceRow {
    pub date: NaiveDate,
    pub close: f64,
    /// Traded value in thousand-currency units.
    pub volume: f64,
}

/// Dated close prices and volumes for one instrument, dates strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    ticker: String,
    rows: Vec<PriceRow>,
}

impl PriceSeries {
    /// Validates ordering, prices and volumes. Row numbers in errors are
    /// 1-based positions in `rows`, offset by one for the header line.
    pub fn new(ticker: impl Into<String>, rows: Vec<PriceRow>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            let line = i as u64 + 2;
            if !(row.close > 0.0) || !row.close.is_finite() {
                return Err(Error::NonPositivePrice {
                    line,
                    value: row.close,
                });
            }
            if !(row.volume >= 0.0) || !row.volume.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("volume {} must be non-negative", row.volume),
                });
            }
            if i > 0 && row.date <= rows[i - 1].date {
                return Err(Error::Ordering {
                    line,
                    date: row.date.to_string(),
                    previous: rows[i - 1].date.to_string(),
                });
            }
        }
        Ok(Self {
            ticker: ticker.into(),
            rows,
        })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn with_ticker(mut self, ticker: impl Into<String>) -> Self {
        self.ticker = ticker.into();
        self
    }

    pub fn rows(&self) -> &[PriceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn closes(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.close)
    }

    pub fn last_close(&self) -> Option<f64> {
        self.rows.last().map(|r| r.close)
    }

    /// The trailing `count` rows (or all of them when fewer exist).
    pub fn tail(&self, count: usize) -> &[PriceRow] {
        &self.rows[self.rows.len().saturating_sub(count)..]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnRow {
    pub date: NaiveDate,
    pub log_return: f64,
}

/// Daily log returns; row `i` is the move into day `i + 1` of the source series.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    rows: Vec<ReturnRow>,
}

impl ReturnSeries {
    pub fn rows(&self) -> &[ReturnRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.log_return)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Temperature {
    /// Energy per Boltzmann constant.
    pub value: f64,
    /// Number of days averaged.
    pub window: usize,
}

impl Temperature {
    pub fn new(value: f64) -> Result<Self> {
        if !(value >= 0.0) {
            return Err(Error::domain(format!(
                "temperature must be non-negative, got {value}"
            )));
        }
        Ok(Self { value, window: 0 })
    }
}

/// Parses a `date,close,volume` CSV (extra columns are ignored, header names
/// are case-insensitive). The ticker is taken from an optional `ticker` or
/// `symbol` column and is otherwise left empty.
pub fn parse_price_csv(text: &str) -> Result<PriceSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing required column `{name}`"),
            })
    };
    let date_col = column("date")?;
    let close_col = column("close")?;
    let volume_col = column("volume")?;
    let ticker_col = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("ticker") || h.eq_ignore_ascii_case("symbol"));

    let mut ticker = String::new();
    let mut rows = Vec::new();
    let mut previous: Option<NaiveDate> = None;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |idx: usize, name: &str| {
            record.get(idx).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing `{name}` field"),
            })
        };
        let number = |idx: usize, name: &str| -> Result<f64> {
            let raw = field(idx, name)?;
            raw.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse `{name}` value {raw:?}"),
            })
        };

        let raw_date = field(date_col, "date")?;
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| Error::Parse {
            line,
            message: format!("cannot parse date {raw_date:?}, expected YYYY-MM-DD"),
        })?;
        let close = number(close_col, "close")?;
        let volume = number(volume_col, "volume")?;

        if let Some(prev) = previous {
            if date <= prev {
                return Err(Error::Ordering {
                    line,
                    date: date.to_string(),
                    previous: prev.to_string(),
                });
            }
        }
        if !(close > 0.0) || !close.is_finite() {
            return Err(Error::NonPositivePrice { line, value: close });
        }
        if !(volume >= 0.0) || !volume.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("volume {volume} must be non-negative"),
            });
        }
        if ticker.is_empty() {
            if let Some(col) = ticker_col {
                ticker = record.get(col).unwrap_or_default().to_string();
            }
        }
        previous = Some(date);
        rows.push(PriceRow {
            date,
            close,
            volume,
        });
    }

    Ok(PriceSeries { ticker, rows })
}

/// `ln(close[i+1] / close[i])` for every consecutive pair.
pub fn log_returns(series: &PriceSeries) -> Result<ReturnSeries> {
    if series.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: series.len(),
        });
    }
    let rows = series
        .rows()
        .windows(2)
        .map(|pair| ReturnRow {
            date: pair[1].date,
            log_return: (pair[1].close / pair[0].close).ln(),
        })
        .collect();
    Ok(ReturnSeries { rows })
}

/// Market temperature `T = <m r^2> / K` over the last `window` returns.
///
/// Each return is paired with the volume of the later day (the day the move
/// happened). Volumes are converted to mass with `units.volume_to_mass` and
/// returns to length with `units.return_to_length`; under natural units the
/// result is the plain mean of `volume * return^2`.
pub fn market_temperature(
    returns: &ReturnSeries,
    series: &PriceSeries,
    window: usize,
    units: &UnitSystem,
) -> Result<Temperature> {
    if window == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if window > returns.len() {
        return Err(Error::InsufficientData {
            needed: window,
            got: returns.len(),
        });
    }
    if series.len() != returns.len() + 1 {
        return Err(Error::domain(
            "return series does not derive from the given price series",
        ));
    }

    let start = returns.len() - window;
    let mut sum = 0.0;
    for (ret, day) in returns.rows()[start..]
        .iter()
        .zip(&series.rows()[start + 1..])
    {
        if ret.date != day.date {
            return Err(Error::domain(format!(
                "return dated {} is not aligned with volume dated {}",
                ret.date, day.date
            )));
        }
        let mass = units.volume_to_mass * day.volume;
        let speed = units.return_to_length * ret.log_return;
        sum += mass * speed * speed;
    }

    Ok(Temperature {
        value: sum / window as f64 / units.boltzmann,
        window,
    })
}

/// Largest relative excursion `|p_t / p_start - 1|` within each overlapping
/// window of `horizon` days, one entry per possible window start.
pub fn window_excursions(series: &PriceSeries, horizon: usize) -> Vec<f64> {
    let closes: Vec<f64> = series.closes().collect();
    if horizon == 0 || closes.len() <= horizon {
        return Vec::new();
    }
    (0..closes.len() - horizon)
        .map(|start| {
            let base = closes[start];
            closes[start + 1..=start + horizon]
                .iter()
                .map(|p| (p / base - 1.0).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Wall half-width: the `confidence` quantile (linear interpolation between
/// order statistics) of the per-window maximum excursions.
pub fn fluctuation_limit(series: &PriceSeries, horizon_days: usize, confidence: f64) -> Result<f64> {
    if horizon_days == 0 {
        return Err(Error::domain("horizon must be at least one day"));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let needed = 2 * horizon_days;
    if series.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: series.len(),
        });
    }

    let mut maxima = window_excursions(series, horizon_days);
    maxima.sort_by(f64::total_cmp);
    let pos = confidence * (maxima.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(maxima[lo] + frac * (maxima[hi] - maxima[lo]))
}
