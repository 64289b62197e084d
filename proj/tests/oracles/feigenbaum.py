"""Check the stored 64-bit lambda_inf mantissa against the published constant."""
from fractions import Fraction
from mpmath import mp, mpf

mp.dps = 40
published = mpf("3.5699456718709449018420051513864989367638")
stored = Fraction(0xE479FD694BAD59C6, 2**62)
print("stored   ", mp.nstr(mpf(stored.numerator) / stored.denominator, 25))
print("error    ", mp.nstr(abs(mpf(stored.numerator) / stored.denominator - published), 5))
print("2^-62    ", mp.nstr(mpf(2) ** -62, 5))
