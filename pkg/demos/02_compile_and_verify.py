# Lower source-level gates to the native {Rxy, cZ} set and verify the result.
#
# Three decompositions do all the work:
#   cNOT t,c   ->  Ry(-pi/2) t ; cZ ; Ry(pi/2) t
#   cRx(a) r,c ->  cZ ; Rx(-a/2) r ; cZ ; Rx(a/2) r
#   Rz(b) q    ->  Rxy(pi/2, pi) q ; Rxy(b/2 - pi/2, pi) q
# Soundness is checked with the phase-invariant distance
# sqrt(1 - |tr(U+V)| / dim), which ignores global phase.

import numpy as np

from qcoproc import compiler
from qcoproc.compiler import equivalence_check, parse_source_program, run_passes
from qcoproc.isa import emit_program

source_text = """\
# prepare both qubits along +x, entangle, rotate in software frame
ry q0, 0.5
cnot q1, q0
rz q1, 0.08
crx q0, q1, 0.16
"""

source = parse_source_program(source_text)
print("source program:")
print(compiler.emit_source_program(source))

native = run_passes(source, ["lower", "schedule"])
print("lowered + scheduled:")
print(emit_program(native))

U = compiler.source_program_unitary(source)
V = compiler.source_program_unitary(native)
report = equivalence_check(U, V, tol=1e-9)
print(f"phase-invariant distance: {report.phase_invariant_distance:.3e}")
print(f"equivalent at 1e-9: {report.equivalent}")
assert report.equivalent

# the same check fails loudly for a wrong circuit
wrong = np.eye(4, dtype=complex)
print(f"distance to the identity (should be large): "
      f"{equivalence_check(U, wrong).phase_invariant_distance:.3f}")
