"""Seeded generators for the benchmark-style corpora used by the test suite.

The public corpora this package targets (mushroom / census-income / forest
covertype) are normally fetched as CSVs and ingested through
``data.load_csv``; these generators produce statistically similar stand-ins
with the same schema shapes so everything runs offline:

* mushroom-like: 22 categorical columns, 126 dictionary values, label a
  deterministic function of two columns (so a tree can reach accuracy 1.0),
  with no single split above roughly 0.8.
* census-like: 6 continuous + 7 categorical columns (83 values), a noisy
  axis-aligned label (mid-career age hump, education boost) plus noisy
  categorical re-encodings of both signals; tree ceiling around 0.86.
* covertype-like: 10 continuous + 2 categorical columns (44 values), a
  nonlinear boundary where linear models trail feed-forward nets.

The value of hand-shaped corpora here is not realism per row but that the
downstream qualitative phenomena are reproducible: zoos contain genuinely
different-shaped models of equal accuracy, the interpretability proxies
disagree about which is best, and importance vectors carry enough structure
for the model-similarity kernel to steer the sequential search.
"""

from __future__ import annotations

import numpy as np

from .data import Column, DataError, RawTable, Schema


def _draw(rng, n, values, probs):
    probs = np.asarray(probs, dtype=float)
    return rng.choice(np.asarray(values, dtype=object), size=n, p=probs / probs.sum())


# --- mushroom-like -----------------------------------------------------------

_MUSHROOM_COLUMNS = [
    ("cap_shape", "bcfksx"),
    ("cap_surface", "fgys"),
    ("cap_color", "nbcgrpuewy"),
    ("bruises", "tf"),
    ("odor", "alcyfmnps"),
    ("gill_attachment", "adfn"),
    ("gill_spacing", "cwd"),
    ("gill_size", "bn"),
    ("gill_color", "knbhgropuewy"),
    ("stalk_shape", "et"),
    ("stalk_root", "bcuezr?"),
    ("stalk_surface_above_ring", "fyks"),
    ("stalk_surface_below_ring", "fyks"),
    ("stalk_color_above_ring", "nbcgopewy"),
    ("stalk_color_below_ring", "nbcgopewy"),
    ("veil_type", "pu"),
    ("veil_color", "nowy"),
    ("ring_number", "not"),
    ("ring_type", "ceflnpsz"),
    ("spore_print_color", "knbhrouwy"),
    ("population", "acnsvy"),
    ("habitat", "glmpuwd"),
]

MUSHROOM_SCHEMA = Schema(
    tuple(Column(name, "categorical", tuple(values)) for name, values in _MUSHROOM_COLUMNS),
    label_column="class",
    positive_label="p",
)


def _mushroom_label(odor, spore) -> np.ndarray:
    """Poisonous iff a fixed rule over two columns holds (depth-4 expressible,
    so greedy trees can reach validation accuracy 1.0 within the depth menu)."""
    return np.isin(odor, list("fps")) | ((odor == "n") & (spore == "r"))


def generate_mushroom_like(n: int = 8124, seed: int = 0) -> RawTable:
    """Label is a deterministic function of (odor, spore print), so pure
    odor-route trees are accurate with one or two columns but longish chains.
    Several impure big-chunk cue columns admit equally accurate trees with
    shorter paths at the price of extra cleanup columns, which is what pulls
    the four interpretability proxies apart across a model zoo.
    """
    rng = np.random.default_rng(seed)
    odor = _draw(
        rng, n, list("fpscymnal"),
        [0.18, 0.06, 0.07, 0.04, 0.02, 0.05, 0.32, 0.14, 0.12],
    )
    spore = np.empty(n, dtype=object)
    none_odor = odor == "n"
    heavy = np.isin(odor, list("fps"))
    rest = ~none_odor & ~heavy
    spore[none_odor] = _draw(rng, int(none_odor.sum()), list("knrw"), [0.40, 0.32, 0.08, 0.20])
    spore[heavy] = _draw(rng, int(heavy.sum()), list("hkw"), [0.50, 0.28, 0.22])
    spore[rest] = _draw(rng, int(rest.sum()), list("knbuowy"), [0.3, 0.3, 0.1, 0.08, 0.08, 0.08, 0.06])
    label = _mushroom_label(odor, spore)

    def cue(when, value, alternative_values, alternative_probs):
        alt = _draw(rng, n, alternative_values, alternative_probs)
        return np.where(when, value, alt)

    # one exact pair cue (= odor in {f,p}) enables 2-split trees that beat the
    # odor chains on paths and node count but not on column count
    stalk_above = cue(np.isin(odor, ("f", "p")), "k", list("fys"), [0.30, 0.15, 0.55])

    # impure cues (partial recall on the poison class, small false-positive
    # rate): trees using them need cleanup splits, giving distinct shapes
    gill_color = cue(
        label & (rng.random(n) < 0.55) | (~label & (rng.random(n) < 0.03)),
        "b", list("knhgropuewy"),
        [0.2, 0.12, 0.12, 0.1, 0.06, 0.06, 0.12, 0.05, 0.07, 0.07, 0.03],
    )
    stalk_below = cue(label & (rng.random(n) < 0.40) | (~label & (rng.random(n) < 0.05)),
                      "k", list("fys"), [0.30, 0.15, 0.55])
    ring_type = cue((odor == "f") & (rng.random(n) < 0.80) | (rng.random(n) < 0.02),
                    "l", list("cenpsz"), [0.02, 0.30, 0.08, 0.45, 0.10, 0.05])
    bruises = np.where(
        label,
        _draw(rng, n, list("tf"), [0.22, 0.78]),
        _draw(rng, n, list("tf"), [0.64, 0.36]),
    )
    population = np.where(
        label,
        _draw(rng, n, list("acnsvy"), [0.02, 0.05, 0.08, 0.22, 0.53, 0.10]),
        _draw(rng, n, list("acnsvy"), [0.08, 0.15, 0.27, 0.30, 0.10, 0.10]),
    )
    gill_size = np.where(
        label & (rng.random(n) < 0.50),
        "n",
        _draw(rng, n, list("nb"), [0.25, 0.75]),
    )

    # remaining columns are label-independent noise over the full dictionary
    noise_specs = {
        "cap_shape": ("bcfksx", [0.05, 0.01, 0.40, 0.08, 0.04, 0.42]),
        "cap_surface": ("fgys", [0.28, 0.01, 0.40, 0.31]),
        "cap_color": ("nbcgrpuewy", [0.28, 0.02, 0.01, 0.23, 0.02, 0.02, 0.02, 0.18, 0.12, 0.10]),
        "gill_attachment": ("adfn", [0.03, 0.01, 0.95, 0.01]),
        "gill_spacing": ("cwd", [0.80, 0.17, 0.03]),
        "stalk_shape": ("et", [0.43, 0.57]),
        "stalk_root": ("bcuezr?", [0.45, 0.07, 0.06, 0.13, 0.01, 0.01, 0.27]),
        "stalk_color_above_ring": ("nbcgopewy", [0.06, 0.05, 0.01, 0.07, 0.23, 0.22, 0.19, 0.10, 0.07]),
        "stalk_color_below_ring": ("nbcgopewy", [0.06, 0.05, 0.01, 0.07, 0.23, 0.22, 0.19, 0.10, 0.07]),
        "veil_type": ("pu", [0.97, 0.03]),
        "veil_color": ("nowy", [0.02, 0.02, 0.94, 0.02]),
        "ring_number": ("not", [0.05, 0.90, 0.05]),
        "habitat": ("glmpuwd", [0.39, 0.12, 0.04, 0.14, 0.05, 0.02, 0.24]),
    }
    columns = {
        "odor": odor,
        "gill_size": gill_size,
        "spore_print_color": spore,
        "stalk_surface_above_ring": stalk_above,
        "stalk_surface_below_ring": stalk_below,
        "gill_color": gill_color,
        "ring_type": ring_type,
        "bruises": bruises,
        "population": population,
    }
    assert set(noise_specs) | set(columns) == {name for name, _ in _MUSHROOM_COLUMNS}
    for name, (values, probs) in noise_specs.items():
        columns[name] = _draw(rng, n, list(values), probs)

    ordered = {name: list(columns[name]) for name, _ in _MUSHROOM_COLUMNS}
    labels = np.where(label, "p", "e").tolist()
    return RawTable(MUSHROOM_SCHEMA, ordered, labels)


# --- census-like -------------------------------------------------------------

_CENSUS_CATEGORICAL = [
    ("workclass", ["private", "self_emp", "self_emp_inc", "federal", "state", "local", "unpaid", "never", "other"]),
    ("education", [f"level_{i}" for i in range(1, 17)]),
    ("marital_status", ["married", "divorced", "never", "separated", "widowed", "spouse_absent", "spouse_af"]),
    ("occupation", [
        "exec", "prof", "tech", "sales", "admin", "service", "craft", "machine",
        "transport", "handlers", "farming", "protective", "priv_house", "armed", "other",
    ]),
    ("life_stage", ["young", "prime", "senior", "retired"]),
    ("degree", ["none", "school", "graduate"]),
    ("native_region", [f"region_{i}" for i in range(1, 30)]),
]

CENSUS_SCHEMA = Schema(
    tuple(
        [Column(n, "continuous") for n in ("age", "fnlwgt", "education_num", "capital_gain", "capital_loss", "hours_per_week")]
        + [Column(name, "categorical", tuple(values)) for name, values in _CENSUS_CATEGORICAL]
    ),
    label_column="income",
    positive_label="high",
)


def generate_census_like(n: int = 24000, seed: int = 0) -> RawTable:
    """Income-style task: a mid-career age hump plus a strong education
    boost, with noisy categorical re-encodings of both (life_stage, degree).

    The redundant encodings matter twice over: trees reach similar accuracy
    through visibly different column sets (which spreads their importance
    vectors, giving the model-similarity kernel real structure), and the
    chain-shaped continuous routes trade off against bushier categorical
    ones across the interpretability proxies.
    """
    rng = np.random.default_rng(seed)
    age = np.clip(rng.normal(38.6, 13.6, n).round(), 17, 90)
    fnlwgt = np.exp(rng.normal(11.9, 0.6, n)).round()
    education_num = np.clip(rng.normal(10.1, 2.6, n).round(), 1, 16)
    has_gain = rng.random(n) < 0.085
    capital_gain = np.where(has_gain, np.exp(rng.normal(8.6, 1.0, n)).round(), 0.0)
    capital_loss = np.where(rng.random(n) < 0.047, np.exp(rng.normal(7.5, 0.25, n)).round(), 0.0)
    hours = np.clip(rng.normal(40.4, 12.3, n).round(), 1, 99)

    marital = _draw(rng, n, _CENSUS_CATEGORICAL[2][1],
                    [0.46, 0.14, 0.32, 0.03, 0.03, 0.013, 0.007])
    occupation = _draw(rng, n, _CENSUS_CATEGORICAL[3][1],
                       [0.13, 0.13, 0.03, 0.11, 0.12, 0.10, 0.13, 0.06, 0.05, 0.04, 0.03, 0.02, 0.01, 0.01, 0.03])
    workclass = _draw(rng, n, _CENSUS_CATEGORICAL[0][1],
                      [0.70, 0.08, 0.03, 0.03, 0.04, 0.06, 0.01, 0.01, 0.04])
    region_probs = np.full(29, 0.10 / 28)
    region_probs[0] = 0.90
    native_region = _draw(rng, n, _CENSUS_CATEGORICAL[6][1], region_probs)
    education = np.asarray([f"level_{int(e)}" for e in education_num], dtype=object)

    # noisy re-encodings (survey answers, not derived records)
    stage_values = np.asarray(_CENSUS_CATEGORICAL[4][1], dtype=object)
    true_stage = np.select([age < 33, age <= 60, age < 75], [0, 1, 2], 3)
    stage_idx = np.where(rng.random(n) < 0.95, true_stage, rng.integers(0, 4, n))
    life_stage = stage_values[stage_idx]
    degree_values = np.asarray(_CENSUS_CATEGORICAL[5][1], dtype=object)
    true_degree = np.select([education_num < 10, education_num < 13], [0, 1], 2)
    degree_idx = np.where(rng.random(n) < 0.97, true_degree, rng.integers(0, 3, n))
    degree = degree_values[degree_idx]

    score = (
        0.75 * (education_num >= 10)
        + 2.20 * (education_num >= 13)
        + 0.60 * (education_num >= 15)
        + 3.00 * ((age >= 33) & (age <= 60))
        + 0.55 * (age > 60)
        + 0.60 * (marital == "married")
        + 2.10 * (capital_gain > 5000)
        + 0.45 * np.isin(occupation, ["exec", "prof"])
        + 0.30 * (hours >= 45)
        - 4.35
    )
    p_high = 1.0 / (1.0 + np.exp(-2.35 * score))
    label = rng.random(n) < p_high

    columns = {
        "age": age.tolist(),
        "fnlwgt": fnlwgt.tolist(),
        "education_num": education_num.tolist(),
        "capital_gain": capital_gain.tolist(),
        "capital_loss": capital_loss.tolist(),
        "hours_per_week": hours.tolist(),
        "workclass": list(workclass),
        "education": list(education),
        "marital_status": list(marital),
        "occupation": list(occupation),
        "life_stage": list(life_stage),
        "degree": list(degree),
        "native_region": list(native_region),
    }
    labels = np.where(label, "high", "low").tolist()
    return RawTable(CENSUS_SCHEMA, columns, labels)


# --- covertype-like ----------------------------------------------------------

COVERTYPE_SCHEMA = Schema(
    tuple(
        [
            Column(n, "continuous")
            for n in (
                "elevation", "aspect", "slope",
                "horiz_dist_hydrology", "vert_dist_hydrology", "horiz_dist_roadways",
                "hillshade_9am", "hillshade_noon", "hillshade_3pm", "horiz_dist_fire",
            )
        ]
        + [
            Column("wilderness_area", "categorical", tuple(f"area_{i}" for i in range(1, 5))),
            Column("soil_type", "categorical", tuple(f"soil_{i}" for i in range(1, 41))),
        ]
    ),
    label_column="cover",
    positive_label="majority",
)


def generate_covertype_like(n: int = 50000, seed: int = 0) -> RawTable:
    """Binary reduction of a covertype-style task: majority cover type vs rest.

    The boundary mixes a moderate linear trend with interaction terms, so
    linear models plateau several points below a small feed-forward net.
    """
    if n < 100:
        raise DataError("covertype generator needs n >= 100")
    rng = np.random.default_rng(seed)
    elevation = rng.normal(2960, 280, n)
    aspect = rng.uniform(0, 360, n)
    slope = np.clip(rng.gamma(3.0, 4.7, n), 0, 66)
    hd_hydro = np.clip(rng.gamma(1.8, 150, n), 0, 1400)
    vd_hydro = rng.normal(46, 58, n)
    hd_road = np.clip(rng.gamma(2.0, 1170, n), 0, 7100)
    hs_9am = np.clip(rng.normal(212, 27, n), 0, 254)
    hs_noon = np.clip(rng.normal(223, 20, n), 0, 254)
    hs_3pm = np.clip(rng.normal(143, 38, n), 0, 254)
    hd_fire = np.clip(rng.gamma(2.0, 990, n), 0, 7200)

    wilderness = _draw(rng, n, [f"area_{i}" for i in range(1, 5)], [0.45, 0.05, 0.44, 0.06])
    soil_probs = rng.permutation(np.r_[np.full(8, 0.06), np.full(32, 0.0163)])
    soil = _draw(rng, n, [f"soil_{i}" for i in range(1, 41)], soil_probs)

    ez = (elevation - 2960) / 280.0
    sz = (slope - 14.1) / 8.0
    az = np.cos(np.deg2rad(aspect))
    hz = (hd_hydro - 270) / 200.0
    rz = (hd_road - 2340) / 1550.0
    soil_idx = np.asarray([int(s.split("_")[1]) for s in soil])
    soil_eff = np.where(soil_idx <= 13, 0.30, np.where(soil_idx >= 30, -0.30, 0.0))
    wild_eff = np.where(np.isin(wilderness, ["area_1", "area_3"]), 0.15, -0.20)

    # a thin linear trend plus interaction terms with near-zero linear signal,
    # so linear models trail nonlinear ones by several accuracy points
    linear = 0.52 * ez + soil_eff + wild_eff
    nonlinear = (
        1.15 * np.sin(2.6 * ez)
        + 1.05 * np.tanh(1.6 * hz) * np.tanh(1.6 * rz)
        + 0.95 * np.tanh(1.4 * az) * np.tanh(1.2 * sz)
    )
    score = linear + nonlinear + rng.normal(0, 0.72, n) + 0.02
    label = score > 0

    columns = {
        "elevation": elevation.round(1).tolist(),
        "aspect": aspect.round(1).tolist(),
        "slope": slope.round(1).tolist(),
        "horiz_dist_hydrology": hd_hydro.round(1).tolist(),
        "vert_dist_hydrology": vd_hydro.round(1).tolist(),
        "horiz_dist_roadways": hd_road.round(1).tolist(),
        "hillshade_9am": hs_9am.round(1).tolist(),
        "hillshade_noon": hs_noon.round(1).tolist(),
        "hillshade_3pm": hs_3pm.round(1).tolist(),
        "horiz_dist_fire": hd_fire.round(1).tolist(),
        "wilderness_area": list(wilderness),
        "soil_type": list(soil),
    }
    labels = np.where(label, "majority", "rest").tolist()
    return RawTable(COVERTYPE_SCHEMA, columns, labels)


GENERATORS = {
    "mushroom": (generate_mushroom_like, MUSHROOM_SCHEMA),
    "census": (generate_census_like, CENSUS_SCHEMA),
    "covertype": (generate_covertype_like, COVERTYPE_SCHEMA),
}
