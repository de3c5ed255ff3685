#include "forge/precision.hpp"

#include <boost/multiprecision/mpfr.hpp>
#include <cstdlib>

namespace forge {

int working_digits() {
    static int digits = [] {
        const char* env = std::getenv("ANOSOV_FORGE_PRECISION");
        if (!env) return 50;
        int d = std::atoi(env);
        return d >= 30 ? d : 30;
    }();
    return digits;
}

void ensure_mp_precision() {
    static bool done = [] {
        boost::multiprecision::mpfr_float::default_precision(working_digits());
        return true;
    }();
    (void)done;
}

}  // namespace forge
