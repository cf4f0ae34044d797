#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "flickermine/hp_miner.hpp"
#include "flickermine/model.hpp"

namespace flickermine {

// Mining reports are line-delimited JSON. Each line carries a "kind":
//
//   detection      {"kind":"detection","video":..,"frame":..,"bbox":[x,y,w,h],"score":..,
//                   "category":..,"label":"hard_negative|pseudo_positive|unverified",
//                   "evidence":[{"frame":..,"status":..,"ncc":..,"pred":[x,y,w,h],"max_iou":..}]}
//   tracklet       {"kind":"tracklet","video":..,"id":..,"gaps":[..],"members":[{"frame":..,
//                   "bbox":..,"score":..,"category":..}]}
//   hard_positive  {"kind":"hard_positive","video":..,"frame":..,"bbox":..,"tracklet":..,
//                   "ncc":..,"flank_before":{..},"flank_after":{..}}
//
// Optional evidence members are omitted when absent. Reals are written in shortest
// round-trip form, so reading a report back reproduces every value exactly.

void write_hn_report(std::ostream& out, std::span<const LabeledDetection> labels);
std::vector<LabeledDetection> read_hn_report(std::istream& in);

void write_hp_report(std::ostream& out, const HardPositiveResult& result);
HardPositiveResult read_hp_report(std::istream& in);

}  // namespace flickermine
