"""
Certifying that every rank in a range is typical
================================================

Around the indicator tensor T0 sits a ball in which every nonnegative tensor
has nonnegative rank equal to the slice bound N.  For each r between the
generic rank and N we build a certificate: r nonnegative terms whose
Jacobian has full row rank, plus nonnegative tail terms that land the sum
inside the ball.  The verifier rechecks everything in exact arithmetic.
"""

from nnrank import (Shape, certificate_from_json, certificate_to_json,
                    generic_rank, typical_rank_witness,
                    verify_typicality_certificate, witness_tensor)

shape = Shape.parse("2,2,3")
ball = witness_tensor(shape)
print("support of T0:", ball.support)
print("radius:", ball.exact_radius)

for r in range(generic_rank(shape), shape.slice_bound() + 1):
    cert = typical_rank_witness(shape, r, seed=1)
    text = certificate_to_json(cert)
    verdict = verify_typicality_certificate(certificate_from_json(text))
    print(f"r={r}: margin {cert.ball_margin:.4f}, {len(text)} bytes of JSON, verified {verdict}")
