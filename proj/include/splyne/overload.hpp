#pragma once

#include <map>
#include <string>
#include <vector>

#include "splyne/lrspace.hpp"
#include "splyne/thbspace.hpp"

namespace splyne {

/// Per-element supported-function census. An element is overloaded when more
/// functions than the local polynomial dimension (p1+1)(p2+1) live on it.
/// Elements are the core-domain elements in mesh order.
struct OverloadReport {
  int limit = 16;
  std::vector<Element> elements;
  std::vector<int> counts;
  std::vector<std::size_t> overloaded;
  std::map<int, int> excess_histogram;
};

OverloadReport overload_report(const LRSpace& space);

/// THB counting: a truncated function lives on an element iff one of its rep
/// terms is nonzero there, since truncation can vacate elements the mother
/// covered.
OverloadReport overload_report(const THBSpace& space);

/// Central-pattern overload removal: at every convex corner of every refined
/// region, the fine meshline closest to the corner is extended outward by
/// three coarser elements and the next one by one, in both directions.
/// Bi-cubic only.
LRSpace lrbno_modify(const LRSpace& space);

/// T-mesh-style removal: corner-closest fine meshlines extend by three
/// coarser elements; every other fine meshline ending on a refinement border
/// extends by two fine elements. Requires corners far enough apart, so the
/// staircase pattern is rejected as "T-mesh incompatible". Bi-cubic only.
LRSpace tlrbno_modify(const LRSpace& space);

/// Staircase-pattern removal by one-directional insertion: every fine
/// vertical meshline strictly inside a band's x-extent is run across the
/// whole domain height, so each band column becomes a tensor strip in u.
/// Bi-cubic only.
LRSpace diagonal_modify(const LRSpace& space);

/// CSV rows "element_id,x0,x1,y0,y1,count,excess", id in element order.
std::string write_report_csv(const OverloadReport& report);

}  // namespace splyne
