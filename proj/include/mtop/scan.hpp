#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "mtop/expr.hpp"

namespace mtop {

// Max-reduction kernels over an indexed sample set. The serial version is the
// reference; the OpenMP version must produce bit-identical results (ties break
// toward the lower index, and a domain error is reported for the lowest index
// that raised one, exactly as the serial loop would encounter it).

enum class ScanMode { Serial, Parallel };

struct ScanBest {
  double value = -std::numeric_limits<double>::infinity();
  long index = -1;

  void consider(double v, long i) {
    if (v > value || (v == value && index >= 0 && i < index)) {
      value = v;
      index = i;
    } else if (index < 0 && v == value) {
      value = v;
      index = i;
    }
  }

  void merge(const ScanBest& o) {
    if (o.index < 0) return;
    if (index < 0 || o.value > value || (o.value == value && o.index < index)) {
      value = o.value;
      index = o.index;
    }
  }
};

struct ScanError {
  long index = -1;
  std::string message;
};

template <class F>
ScanBest scan_points_serial(long count, F&& value_at, ScanError* err) {
  ScanBest best;
  for (long i = 0; i < count; ++i) {
    double v;
    try {
      v = value_at(i);
    } catch (const EvalError& e) {
      if (err) {
        err->index = i;
        err->message = e.what();
        return ScanBest{};
      }
      throw;
    }
    best.consider(v, i);
  }
  return best;
}

template <class F>
ScanBest scan_points_parallel(long count, F&& value_at, ScanError* err) {
  ScanBest best;
  long err_index = std::numeric_limits<long>::max();
  std::string err_message;
#pragma omp parallel
  {
    ScanBest local;
    long local_err = std::numeric_limits<long>::max();
    std::string local_msg;
#pragma omp for nowait schedule(static)
    for (long i = 0; i < count; ++i) {
      if (i > local_err) continue;
      try {
        double v = value_at(i);
        local.consider(v, i);
      } catch (const EvalError& e) {
        if (i < local_err) {
          local_err = i;
          local_msg = e.what();
        }
      }
    }
#pragma omp critical
    {
      best.merge(local);
      if (local_err < err_index) {
        err_index = local_err;
        err_message = local_msg;
      }
    }
  }
  if (err_index != std::numeric_limits<long>::max()) {
    if (!err) throw EvalError(err_message);
    err->index = err_index;
    err->message = err_message;
    return ScanBest{};  // an errored scan reports only the error, as serial does
  }
  return best;
}

template <class F>
ScanBest scan_points(long count, F&& value_at, ScanMode mode, ScanError* err) {
  if (err) *err = ScanError{};
  ScanBest b = mode == ScanMode::Serial
                   ? scan_points_serial(count, std::forward<F>(value_at), err)
                   : scan_points_parallel(count, std::forward<F>(value_at), err);
  return b;
}

}  // namespace mtop
