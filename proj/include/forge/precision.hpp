#pragma once

namespace forge {

// Decimal digits used by escalated (multiprecision) re-checks; reads the
// ANOSOV_FORGE_PRECISION environment variable once (default 50, minimum 30).
int working_digits();

// Applies working_digits() to the global mpfr default precision. Call before
// constructing multiprecision values. Idempotent.
void ensure_mp_precision();

}  // namespace forge
