#ifndef HALFWAVE_SNAPSHOT_HPP
#define HALFWAVE_SNAPSHOT_HPP

// Bit-exact field snapshots:
//   magic "HWF1" | u64 LE n | f64 LE box_length | f64 LE time |
//   n interleaved (re, im) f64 LE pairs.

#include <string>

#include "halfwave/field.hpp"

namespace halfwave {

void save_snapshot(const std::string& path, const ComplexField& f, double time);

struct Snapshot {
    ComplexField field;
    double time = 0.0;
};

Snapshot load_snapshot(const std::string& path);

}  // namespace halfwave

#endif
