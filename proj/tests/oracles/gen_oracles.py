#!/usr/bin/env python3
"""Regenerates oracle_values.hpp from 40-digit mpmath evaluations.

The C++ tests compare the library against these frozen values; this script is
the independent oracle and never calls into the library.
"""
import mpmath as mp

mp.mp.dps = 40


def fmt(x):
    return mp.nstr(mp.mpf(x), 25, min_fixed=-5, max_fixed=5) if abs(x) >= mp.mpf("1e-300") else "0.0"


def normal_cdf(z):
    return mp.ncdf(z)


def t_cdf(t, df):
    t = mp.mpf(t)
    df = mp.mpf(df)
    x = df / (df + t * t)
    tail = mp.betainc(df / 2, mp.mpf(1) / 2, 0, x, regularized=True) / 2
    return 1 - tail if t > 0 else tail


lines = ["// Generated by gen_oracles.py (mpmath, 40 digits). Do not edit.",
         "#pragma once", "", "#include <array>", "", "namespace oracle {", ""]

lines.append("struct Point { double x; double value; };")
lines.append("struct TPoint { double t; double df; double value; };")
lines.append("")

lines.append("struct BetaPoint { double a; double b; double x; double value; };")
lines.append("")

xs = [-6 + 12 * i / 120 for i in range(121)]
lines.append("inline constexpr std::array<Point, %d> erf_grid{{" % len(xs))
for x in xs:
    lines.append("    {%r, %s}," % (x, fmt(mp.erf(mp.mpf(x)))))
lines.append("}};")
lines.append("")

xs = [27 * i / 90 for i in range(91)]
lines.append("inline constexpr std::array<Point, %d> erfc_grid{{" % len(xs))
for x in xs:
    lines.append("    {%r, %s}," % (x, fmt(mp.erfc(mp.mpf(x)))))
lines.append("}};")
lines.append("")

bpts = []
for a in [0.25, 0.5, 1, 2.5, 10, 80, 600]:
    for b in [0.5, 1, 3, 40, 1000]:
        for x in [0.001, 0.1, 0.35, 0.5, 0.8, 0.999]:
            bpts.append((a, b, x, mp.betainc(a, b, 0, x, regularized=True)))
lines.append("inline constexpr std::array<BetaPoint, %d> incomplete_beta_grid{{" % len(bpts))
for a, b, x, v in bpts:
    lines.append("    {%r, %r, %r, %s}," % (a, b, x, fmt(v)))
lines.append("}};")
lines.append("")


# Small fixed datasets for the t-tests and regression, evaluated from the
# textbook formulas in 40-digit arithmetic.
def t_two_sided(t, df):
    return 2 * (1 - t_cdf(abs(t), df))


def t_quantile(p, df):
    return mp.findroot(lambda t: t_cdf(t, df) - p, 2)


def mean(v):
    return mp.fsum(v) / len(v)


def var(v):
    m = mean(v)
    return mp.fsum((x - m) ** 2 for x in v) / (len(v) - 1)


sample_a = [mp.mpf(x) for x in ["2.1", "3.4", "1.9", "5.6", "4.2", "3.3", "2.8", "4.9"]]
sample_b = [mp.mpf(x) for x in ["1.2", "2.0", "2.7", "1.1", "3.0", "0.4"]]
reg_x = [mp.mpf(x) for x in ["0.21", "0.35", "0.42", "0.50", "0.61", "0.74", "0.83", "0.97"]]
reg_y = [mp.mpf(x) for x in ["0.88", "0.97", "0.96", "1.09", "1.12", "1.23", "1.27", "1.41"]]

stats = {}
mu0 = mp.mpf("3")
n = len(sample_a)
t = (mean(sample_a) - mu0) / mp.sqrt(var(sample_a) / n)
stats.update(one_t=t, one_df=n - 1, one_p=t_two_sided(t, n - 1))

n1, n2 = len(sample_a), len(sample_b)
v1, v2 = var(sample_a), var(sample_b)
diff = mean(sample_a) - mean(sample_b)
sp2 = ((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2)
t = diff / mp.sqrt(sp2 * (mp.mpf(1) / n1 + mp.mpf(1) / n2))
stats.update(pooled_t=t, pooled_df=n1 + n2 - 2, pooled_p=t_two_sided(t, n1 + n2 - 2))
a, b = v1 / n1, v2 / n2
df = (a + b) ** 2 / (a * a / (n1 - 1) + b * b / (n2 - 1))
t = diff / mp.sqrt(a + b)
stats.update(welch_t=t, welch_df=df, welch_p=t_two_sided(t, df))

# Normal equations [n, sx; sx, sxx] [c0; c1] = [sy; sxy].
n = len(reg_x)
sx, sy = mp.fsum(reg_x), mp.fsum(reg_y)
sxx = mp.fsum(x * x for x in reg_x)
sxy = mp.fsum(x * y for x, y in zip(reg_x, reg_y))
det = n * sxx - sx * sx
c1 = (n * sxy - sx * sy) / det
c0 = (sy * sxx - sx * sxy) / det
res = [y - c0 - c1 * x for x, y in zip(reg_x, reg_y)]
sse = mp.fsum(r * r for r in res)
my = mean(reg_y)
sst = mp.fsum((y - my) ** 2 for y in reg_y)
mse = sse / (n - 2)
se1 = mp.sqrt(mse * n / det)
se0 = mp.sqrt(mse * sxx / det)
tc = t_quantile(mp.mpf("0.975"), n - 2)
stats.update(reg_slope=c1, reg_intercept=c0, reg_slope_se=se1, reg_intercept_se=se0,
             reg_r2=1 - sse / sst, reg_f=(sst - sse) / mse,
             reg_slope_lo=c1 - tc * se1, reg_slope_hi=c1 + tc * se1,
             reg_intercept_lo=c0 - tc * se0, reg_intercept_hi=c0 + tc * se0)

def arr(name, v):
    lines.append("inline constexpr std::array<double, %d> %s{%s};" % (len(v), name, ", ".join(fmt(x) for x in v)))

arr("sample_a", sample_a)
arr("sample_b", sample_b)
arr("reg_x", reg_x)
arr("reg_y", reg_y)
lines.append("inline constexpr double sample_a_mu0 = 3.0;")
for name, v in stats.items():
    lines.append("inline constexpr double %s = %s;" % (name, fmt(v)))
lines.append("")

zs = [-37 + 45 * i / 199 for i in range(200)]
lines.append("inline constexpr std::array<Point, %d> normal_cdf_grid{{" % len(zs))
for z in zs:
    lines.append("    {%r, %s}," % (z, fmt(normal_cdf(mp.mpf(z)))))
lines.append("}};")
lines.append("")

pts = []
dfs = [0.5, 1, 1.5, 2, 3, 4, 5, 7, 10, 13, 17, 20, 30, 50, 75, 100, 250, 500, 1000, 5000]
ts = [-12 + 24 * i / 49 for i in range(50)]
for df in dfs:
    for t in ts:
        pts.append((t, df, t_cdf(t, df)))
lines.append("inline constexpr std::array<TPoint, %d> t_cdf_grid{{" % len(pts))
for t, df, v in pts:
    lines.append("    {%r, %r, %s}," % (t, df, fmt(v)))
lines.append("}};")
lines.append("")

consts = {
    "normal_cdf_at_1": normal_cdf(1),
    "slope_sigma_5": 1 / mp.sqrt(2 * mp.pi * 25),
    "wcs_sigma_2_4": mp.sqrt(2) * 8 / 6,
    "benefit_ratio_0_2": mp.sqrt(2) / 2 * (1 + mp.mpf("0.2")),
    "biased_benefit_064_071": mp.sqrt(2) / 2 + mp.sqrt(2) / 2 * mp.mpf("0.64") / mp.mpf("0.71"),
    "t_cdf_large_df": t_cdf(mp.mpf("1.959964"), 10**6),
}
for name, v in consts.items():
    lines.append("inline constexpr double %s = %s;" % (name, fmt(v)))
lines.append("")
lines.append("}  // namespace oracle")
lines.append("")

with open(__file__.replace("gen_oracles.py", "oracle_values.hpp"), "w") as f:
    f.write("\n".join(lines))
