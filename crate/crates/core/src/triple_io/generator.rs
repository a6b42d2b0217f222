//! Synthetic weather-sensor graph shaped like linked sensor observation data.
//!
//! Each sensor is a hub linking to its observations; each observation carries
//! 4 to 6 measurement predicates, some of them with several readings. Reading
//! multiplicity differs per predicate, which spreads predicate centralities
//! over roughly `[0.14, 1]`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Triple, TripleStore};

/// IRIs used by [`generate_lod_like`].
pub struct LodVocabulary;

impl LodVocabulary {
    pub const RDF_TYPE: &'static str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const SYSTEM: &'static str = "http://knoesis.wright.edu/ssw/ont/sensor-observation.owl#System";
    pub const OBSERVATION: &'static str =
        "http://knoesis.wright.edu/ssw/ont/sensor-observation.owl#Observation";
    pub const GENERATED_OBSERVATION: &'static str =
        "http://knoesis.wright.edu/ssw/ont/sensor-observation.owl#generatedObservation";
    pub const SAMPLING_TIME: &'static str =
        "http://knoesis.wright.edu/ssw/ont/sensor-observation.owl#samplingTime";
    pub const LAT: &'static str = "http://www.w3.org/2003/01/geo/wgs84_pos#lat";
    pub const LONG: &'static str = "http://www.w3.org/2003/01/geo/wgs84_pos#long";
    pub const SENSOR_NS: &'static str = "http://knoesis.wright.edu/ssw/System_";
    pub const OBSERVATION_NS: &'static str = "http://knoesis.wright.edu/ssw/Observation_";
    const WEATHER_NS: &'static str = "http://knoesis.wright.edu/ssw/ont/weather.owl#";

    /// Measurement predicates (local names) with their reading-count range.
    pub const MEASUREMENTS: [Measurement; 8] = [
        Measurement::new("WindDirection", Readings::Coin(0.4), (0.0, 360.0)),
        Measurement::new("WindGust", Readings::Coin(0.75), (0.0, 40.0)),
        Measurement::new("AirTemperature", Readings::Uniform(1, 4), (-20.0, 45.0)),
        Measurement::new("RelativeHumidity", Readings::Uniform(1, 5), (5.0, 100.0)),
        Measurement::new("Precipitation", Readings::Uniform(1, 7), (0.0, 30.0)),
        Measurement::new("WindSpeed", Readings::Uniform(1, 6), (0.0, 35.0)),
        Measurement::new("Visibility", Readings::Uniform(2, 12), (0.0, 16.0)),
        Measurement::new("Pressure", Readings::Uniform(1, 8), (950.0, 1050.0)),
    ];

    pub fn measurement_predicate(local: &str) -> String {
        format!("{}{}", Self::WEATHER_NS, local)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Measurement {
    pub name: &'static str,
    pub readings: Readings,
    pub range: (f64, f64),
}

impl Measurement {
    const fn new(name: &'static str, readings: Readings, range: (f64, f64)) -> Self {
        Measurement {
            name,
            readings,
            range,
        }
    }
}

/// How many readings of one measurement an observation carries.
#[derive(Debug, Clone, Copy)]
pub enum Readings {
    /// One reading, plus a second with the given probability.
    Coin(f64),
    /// Uniform in the inclusive range.
    Uniform(usize, usize),
}

impl Readings {
    fn sample(self, rng: &mut impl Rng) -> usize {
        match self {
            Readings::Coin(p) => 1 + usize::from(rng.gen_bool(p)),
            Readings::Uniform(lo, hi) => rng.gen_range(lo..=hi),
        }
    }
}

/// Deterministic star-shaped sensor/observation store.
pub fn generate_lod_like(seed: u64, sensors: usize, observations_per_sensor: usize) -> TripleStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let predicates: Vec<String> = LodVocabulary::MEASUREMENTS
        .iter()
        .map(|m| LodVocabulary::measurement_predicate(m.name))
        .collect();
    let mut order: Vec<usize> = (0..predicates.len()).collect();
    let mut triples = Vec::with_capacity(sensors * (4 + observations_per_sensor * 22));

    for s in 0..sensors {
        let sensor = format!("{}{s}", LodVocabulary::SENSOR_NS);
        triples.push(Triple::resource(&sensor, LodVocabulary::RDF_TYPE, LodVocabulary::SYSTEM));
        triples.push(Triple::literal(
            &sensor,
            LodVocabulary::LAT,
            format!("{:.4}", rng.gen_range(24.0..49.0)),
        ));
        triples.push(Triple::literal(
            &sensor,
            LodVocabulary::LONG,
            format!("{:.4}", rng.gen_range(-125.0..-67.0)),
        ));
        for o in 0..observations_per_sensor {
            let obs = format!("{}{s}_{o}", LodVocabulary::OBSERVATION_NS);
            triples.push(Triple::resource(&sensor, LodVocabulary::GENERATED_OBSERVATION, &obs));
            triples.push(Triple::resource(&obs, LodVocabulary::RDF_TYPE, LodVocabulary::OBSERVATION));
            let minute = o % 60;
            let hour = (o / 60) % 24;
            let day = 1 + (o / 1440) % 28;
            triples.push(Triple::literal(
                &obs,
                LodVocabulary::SAMPLING_TIME,
                format!("2004-08-{day:02}T{hour:02}:{minute:02}:00-05:00"),
            ));
            let picked = rng.gen_range(4..=6);
            order.shuffle(&mut rng);
            let mut chosen = order[..picked].to_vec();
            chosen.sort_unstable();
            for &m in &chosen {
                let spec = LodVocabulary::MEASUREMENTS[m];
                let count = spec.readings.sample(&mut rng);
                let base = rng.gen_range(spec.range.0..spec.range.1);
                for r in 0..count {
                    // distinct values so readings never collapse as duplicates
                    triples.push(Triple::literal(
                        &obs,
                        &predicates[m],
                        format!("{:.2}", base + r as f64 * 0.25),
                    ));
                }
            }
        }
    }
    TripleStore::from_triples(triples).expect("generated terms are never empty")
}
