# Regenerates chi2_sf_oracle.tsv: survival function of the chi-squared
# distribution with one degree of freedom, erfc(sqrt(t/2)), at 50 digits.
import mpmath

mpmath.mp.dps = 60
POINTS = [
    "0", "1e-12", "1e-6", "0.001", "0.01", "0.1", "0.5", "1", "2",
    "2.705543454095404", "3", "3.8414588206941245", "5", "6.634896601021214",
    "8", "10", "15", "20", "30", "50", "75", "100", "150", "200", "300",
    "400", "500", "600", "700",
]

print("t\tsf")
for s in POINTS:
    t = mpmath.mpf(s)
    sf = mpmath.erfc(mpmath.sqrt(t / 2))
    print(f"{s}\t{mpmath.nstr(sf, 50)}")
