"""Seeded synthetic GCC-style indicator panel.

HDI levels, component trajectories and shocks (oil-price slumps in 1998,
2009, 2015-16 and 2020; a 2020-21 life-expectancy dip) are calibrated by
hand to the rough magnitudes of published GCC figures for 1996-2022. The
target is ``hdi_compose`` of the component series, rounded to three
decimals as published HDI values are. The panel also carries correlated
development indicators, pure-noise indicators, scattered missing values
and one indicator too short to be ranked.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hdicast.data_model import AnnualSeries, HdiGoalposts, Panel, hdi_compose

START_YEAR, END_YEAR = 1996, 2022
TARGET = "HDI"

LIFE = "SP.DYN.LE00.IN"
EYS = "UNDP.EYS"
MYS = "UNDP.MYS"
GNI = "UNDP.GNIPC.PPP"


@dataclass(frozen=True)
class CountryProfile:
    code: str
    life: tuple[float, float]
    eys: tuple[float, float]
    mys: tuple[float, float]
    gni: tuple[float, float]
    population: tuple[float, float]
    oil_exposure: float


PROFILES = (
    CountryProfile("ARE", (72.8, 79.2), (11.2, 17.2), (8.0, 12.7), (82000, 74000), (2.6e6, 9.4e6), 0.7),
    CountryProfile("BHR", (73.2, 79.3), (13.2, 16.2), (7.1, 11.0), (38000, 49000), (0.58e6, 1.47e6), 0.8),
    CountryProfile("KWT", (73.6, 78.7), (12.9, 15.4), (6.2, 7.5), (62000, 58000), (1.7e6, 4.3e6), 1.0),
    CountryProfile("OMN", (70.6, 73.9), (10.9, 14.7), (5.4, 11.0), (29000, 34000), (2.3e6, 4.6e6), 1.1),
    CountryProfile("QAT", (76.1, 80.4), (12.4, 13.6), (7.4, 10.4), (93000, 95000), (0.5e6, 2.7e6), 0.9),
    CountryProfile("SAU", (70.9, 77.4), (11.4, 16.3), (6.4, 11.3), (35000, 47000), (19.5e6, 36.4e6), 1.0),
)

OIL_SHOCK = {1998: -0.07, 1999: -0.03, 2009: -0.09, 2010: -0.03, 2015: -0.05, 2016: -0.07,
             2017: -0.03, 2020: -0.12, 2021: -0.05}
LIFE_SHOCK = {2020: -0.9, 2021: -0.7}


def _ease(n: int, curvature: float) -> np.ndarray:
    """Monotone 0..1 path; curvature > 0 front-loads progress."""
    t = np.linspace(0.0, 1.0, n)
    return (1 - np.exp(-curvature * t)) / (1 - np.exp(-curvature)) if curvature else t


def _ar1(rng, n: int, sd: float, rho: float = 0.6) -> np.ndarray:
    e = rng.normal(0.0, sd, n)
    out = np.empty(n)
    out[0] = e[0]
    for i in range(1, n):
        out[i] = rho * out[i - 1] + e[i]
    return out


def generate_panel(seed: int = 20240603, goalposts: HdiGoalposts = HdiGoalposts()) -> Panel:
    rng = np.random.default_rng(seed)
    years = np.arange(START_YEAR, END_YEAR + 1)
    n = years.size
    oil = np.array([OIL_SHOCK.get(int(y), 0.0) for y in years])
    life_dip = np.array([LIFE_SHOCK.get(int(y), 0.0) for y in years])
    cells = {}

    def put(country, code, values, missing_rate=0.0, observed_from=None, observed_to=None):
        vals = [float(v) for v in values]
        out = []
        for y, v in zip(years, vals):
            gone = (observed_from is not None and y < observed_from) or (observed_to is not None and y > observed_to)
            if missing_rate and rng.random() < missing_rate:
                gone = True
            out.append(None if gone else v)
        cells[(country, code)] = AnnualSeries(START_YEAR, tuple(out))

    for prof in PROFILES:
        c = prof.code
        curv = rng.uniform(0.3, 1.5)
        life = prof.life[0] + (prof.life[1] - prof.life[0]) * _ease(n, curv) + _ar1(rng, n, 0.08) + life_dip
        eys = prof.eys[0] + (prof.eys[1] - prof.eys[0]) * _ease(n, rng.uniform(0.0, 1.2)) + _ar1(rng, n, 0.1)
        mys = prof.mys[0] + (prof.mys[1] - prof.mys[0]) * _ease(n, rng.uniform(-0.5, 0.8)) + _ar1(rng, n, 0.05)
        log_gni = (np.log(prof.gni[0]) + (np.log(prof.gni[1]) - np.log(prof.gni[0])) * _ease(n, 0.2)
                   + prof.oil_exposure * oil + _ar1(rng, n, 0.02))
        gni = np.exp(log_gni)
        hdi = np.array([round(hdi_compose(a, m, e, g, goalposts), 3) for a, m, e, g in zip(life, mys, eys, gni)])

        put(c, TARGET, hdi)
        put(c, LIFE, np.round(life, 3))
        put(c, EYS, np.round(eys, 2))
        put(c, MYS, np.round(mys, 2))
        put(c, GNI, np.round(gni, 1))

        pop = prof.population[0] * (prof.population[1] / prof.population[0]) ** _ease(n, 0.4)
        put(c, "SP.POP.TOTL", np.round(pop * np.exp(_ar1(rng, n, 0.005))))
        put(c, "NY.GDP.PCAP.KD", np.round(gni * rng.uniform(0.8, 1.1) * np.exp(0.4 * oil + _ar1(rng, n, 0.03)), 1))
        put(c, "NY.GDP.MKTP.KD.ZG", np.round(3.0 + 30 * np.diff(np.r_[0.0, oil]) + rng.normal(0, 2.0, n), 3))
        urban = 100 - (100 - rng.uniform(78, 92)) * np.exp(-0.02 * np.arange(n)) + _ar1(rng, n, 0.15)
        put(c, "SP.URB.TOTL.IN.ZS", np.round(np.minimum(urban, 100.0), 3))
        internet = 99.0 / (1.0 + np.exp(-(years - rng.uniform(2006, 2011)) / rng.uniform(2.0, 3.5)))
        put(c, "IT.NET.USER.ZS", np.round(internet + np.abs(_ar1(rng, n, 0.6)), 2), observed_from=1998)
        imr = rng.uniform(12, 22) * np.exp(-np.arange(n) / rng.uniform(25, 40))
        put(c, "SP.DYN.IMRT.IN", np.round(imr + _ar1(rng, n, 0.2), 2))
        tfr = rng.uniform(3.5, 5.0) - rng.uniform(1.2, 2.2) * _ease(n, 0.8)
        put(c, "SP.DYN.TFRT.IN", np.round(tfr + _ar1(rng, n, 0.04), 3))
        chex = rng.uniform(500, 900) * np.exp(0.045 * np.arange(n) + 0.5 * oil + _ar1(rng, n, 0.04))
        put(c, "SH.XPD.CHEX.PC.CD", np.round(chex, 1), observed_from=2000, observed_to=2021)
        put(c, "EN.ATM.CO2E.PC", np.round(rng.uniform(15, 40) + _ar1(rng, n, 1.5, 0.8), 3), observed_to=2020)
        put(c, "EG.USE.PCAP.KG.OE", np.round(rng.uniform(6000, 12000) * np.exp(_ar1(rng, n, 0.05, 0.8)), 1),
            observed_to=2015)
        put(c, "FP.CPI.TOTL.ZG", np.round(2.0 + _ar1(rng, n, 1.5, 0.3), 3))
        put(c, "SL.UEM.TOTL.ZS", np.round(np.clip(rng.uniform(2, 6) + np.cumsum(rng.normal(0, 0.3, n)), 0.1, None), 3))
        put(c, "SE.PRM.ENRR", np.round(100 + _ar1(rng, n, 3.0, 0.5), 3), missing_rate=0.2)
        put(c, "NE.TRD.GNFS.ZS", np.round(rng.uniform(70, 150) + 40 * oil + _ar1(rng, n, 6.0, 0.7), 3),
            missing_rate=0.05)
        put(c, "MS.MIL.XPND.GD.ZS", np.round(rng.uniform(3, 8) + _ar1(rng, n, 0.6, 0.7), 3), missing_rate=0.05)
        put(c, "BX.KLT.DINV.WD.GD.ZS", np.round(rng.normal(2.0, 1.5, n), 3), missing_rate=0.1)
        put(c, "SI.POV.GINI", np.round(rng.uniform(35, 45) + rng.normal(0, 1, n), 2), observed_from=2014,
            observed_to=2017)

    countries = tuple(sorted(p.code for p in PROFILES))
    indicators = tuple(sorted({i for _, i in cells}))
    return Panel(countries, indicators, cells, TARGET, START_YEAR, END_YEAR)
