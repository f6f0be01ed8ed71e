"""Polynomial families that are simultaneously prime, and how to build them.

    python3 demos/demo_hypotheses.py
"""

from goo import hypotheses
from goo.hypotheses import IntPolynomial


def check(polys) -> None:
    names = ", ".join(str(p) for p in polys)
    bad = hypotheses.bunyakovsky_check(polys)
    verdict = "admissible" if bad is None else f"obstructed: every value divisible by {bad}"
    print(f"  {{{names}}}: {verdict}")


def main() -> None:
    print("single polynomials first:")
    check([IntPolynomial((1, 0, 1))])
    check([IntPolynomial((1, 1, 2))])
    print()

    print("shifted squares (65y + s)^2 + 1 for a few shifts s:")
    for s in (1, 3, 5, 9):
        check([IntPolynomial.shifted_square(65, s)])
    print()

    print("shifts 3 and 5 fail because 65 = 5 * 13; the certificates:")
    roots5 = hypotheses.residue_certificate(IntPolynomial.shifted_square(65, 3), 5)
    roots13 = hypotheses.residue_certificate(IntPolynomial.shifted_square(65, 5), 13)
    print(f"  (65y+3)^2 + 1 vanishes mod 5  at y in {sorted(roots5)}")
    print(f"  (65y+5)^2 + 1 vanishes mod 13 at y in {sorted(roots13)}")
    print()

    fam = [IntPolynomial.shifted_square(65, 1), IntPolynomial.shifted_square(65, 9)]
    print("the pair with shifts 1 and 9 is admissible; scanning to 200000:")
    result = hypotheses.simultaneous_prime_scan(fam, 200_000)
    print(f"  {result.count} arguments where both values are prime")
    for cp in result.checkpoints:
        print(
            f"  through {cp.y:>7}: {cp.hits:>4} hits, "
            f"shape constant {cp.fitted_constant:.4f}"
        )
    first = result.hits[0]
    print(f"  first at y = {first}: {fam[0](first)} and {fam[1](first)}")
    print()

    print("constructed shift families are admissible by design:")
    shifts = hypotheses.construct_shifts(4)
    built = [IntPolynomial.shifted_square(1, -b) for b in shifts]
    print(f"  shifts {shifts}")
    check(built)


if __name__ == "__main__":
    main()
