use std::path::Path;

use crate::error::DataError;

#[derive(Debug, Clone, PartialEq)]
pub struct SiteMeta {
    pub site_id: String,
    pub name: String,
    /// Degrees, south negative.
    pub latitude: f64,
    /// Degrees, west negative.
    pub longitude: f64,
    /// Hours ahead of UTC for local standard time.
    pub utc_offset: f64,
}

impl SiteMeta {
    pub fn new(
        site_id: impl Into<String>,
        name: impl Into<String>,
        latitude: f64,
        longitude: f64,
        utc_offset: f64,
    ) -> Result<Self, DataError> {
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(DataError::Site(format!("latitude {latitude} outside [-90, 90]")));
        }
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(DataError::Site(format!("longitude {longitude} outside [-180, 180]")));
        }
        if !(-14.0..=14.0).contains(&utc_offset) {
            return Err(DataError::Site(format!("utc_offset {utc_offset} outside [-14, 14]")));
        }
        Ok(SiteMeta {
            site_id: site_id.into(),
            name: name.into(),
            latitude,
            longitude,
            utc_offset,
        })
    }

    /// Renders the `key=value` site file form.
    pub fn to_file_string(&self) -> String {
        format!(
            "site_id={}\nname={}\nlatitude={}\nlongitude={}\nutc_offset={}\n",
            self.site_id, self.name, self.latitude, self.longitude, self.utc_offset
        )
    }
}

/// Parses `key=value` lines. Blank lines and `#` comments are ignored.
pub fn parse_site(text: &str) -> Result<SiteMeta, DataError> {
    let mut site_id = None;
    let mut name = None;
    let mut lat = None;
    let mut lon = None;
    let mut offset = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| DataError::Malformed {
            line: i + 1,
            msg: format!("expected key=value, got {line:?}"),
        })?;
        let value = value.trim();
        let number = || {
            value.parse::<f64>().map_err(|_| DataError::Malformed {
                line: i + 1,
                msg: format!("{} is not a number: {value:?}", key.trim()),
            })
        };
        match key.trim() {
            "site_id" => site_id = Some(value.to_string()),
            "name" => name = Some(value.to_string()),
            "latitude" => lat = Some(number()?),
            "longitude" => lon = Some(number()?),
            "utc_offset" => offset = Some(number()?),
            other => {
                return Err(DataError::Malformed {
                    line: i + 1,
                    msg: format!("unknown key {other:?}"),
                })
            }
        }
    }
    let missing = |k: &str| DataError::Site(format!("missing key {k}"));
    SiteMeta::new(
        site_id.ok_or_else(|| missing("site_id"))?,
        name.ok_or_else(|| missing("name"))?,
        lat.ok_or_else(|| missing("latitude"))?,
        lon.ok_or_else(|| missing("longitude"))?,
        offset.ok_or_else(|| missing("utc_offset"))?,
    )
}

pub fn load_site(path: &Path) -> Result<SiteMeta, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_site(&text)
}
