#pragma once

#include "ward/core.hpp"

namespace ward::fft {

// In-place batched 1-D DFT over `howmany` contiguous rows of length `len`.
// sign = -1 forward (e^{-2 pi i jk/n}), +1 backward; unnormalised.
// Plans are cached and created under a lock; execution is thread safe.
void rows(cplx* data, int len, int howmany, int sign);

inline void forward(CVec& v) { rows(v.data(), int(v.size()), 1, -1); }
inline void backward(CVec& v) { rows(v.data(), int(v.size()), 1, +1); }

}  // namespace ward::fft
