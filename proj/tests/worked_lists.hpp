// SPDX-License-Identifier: Apache-2.0

// Published k=5 repair options, written as sums of data fragments, and a
// translator from "(d_2+d_3)+(d_4)" to the set of nodes storing each sum.

#pragma once

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nmds/codec.hpp"

namespace nmds::worked {

// Three-node options for d1 with p1 alive.
inline const std::vector<std::string> kThreeNodeS1 = {
    "(d_2+d_3+d_4+d_5)+(d_2)+(d_1+d_3+d_4+d_5)",
    "(d_2+d_3+d_4+d_5)+(d_3)+(d_1+d_2+d_4+d_5)",
    "(d_2+d_3+d_4+d_5)+(d_4)+(d_1+d_2+d_3+d_5)",
    "(d_2+d_3+d_4+d_5)+(d_5)+(d_1+d_2+d_3+d_4)",
};

// Options for p1 when d1 is also gone (even number of parities).
inline const std::vector<std::string> kParityP1 = {
    "(d_2)+(d_3)+(d_4)+(d_5)",
    "(d_1+d_3+d_4+d_5)+(d_1+d_2+d_4+d_5)+(d_4)+(d_5)",
    "(d_1+d_3+d_4+d_5)+(d_1+d_2+d_3+d_5)+(d_3)+(d_5)",
    "(d_1+d_3+d_4+d_5)+(d_1+d_2+d_3+d_4)+(d_3)+(d_4)",
    "(d_1+d_2+d_4+d_5)+(d_1+d_2+d_3+d_5)+(d_2)+(d_5)",
    "(d_1+d_2+d_4+d_5)+(d_1+d_2+d_3+d_4)+(d_2)+(d_4)",
    "(d_1+d_2+d_3+d_5)+(d_1+d_2+d_3+d_4)+(d_2)+(d_3)",
    "(d_1+d_3+d_4+d_5)+(d_1+d_2+d_4+d_5)+(d_1+d_2+d_3+d_5)+(d_1+d_2+d_3+d_4)",
};

// Options for d1 when p1 is also gone (odd number of parities).
inline const std::vector<std::string> kSystematicS1 = {
    "(d_1+d_3+d_4+d_5)+(d_3)+(d_4)+(d_5)",
    "(d_1+d_2+d_4+d_5)+(d_2)+(d_4)+(d_5)",
    "(d_1+d_2+d_3+d_5)+(d_2)+(d_3)+(d_5)",
    "(d_1+d_2+d_3+d_4)+(d_2)+(d_3)+(d_4)",
    "(d_1+d_3+d_4+d_5)+(d_1+d_2+d_4+d_5)+(d_1+d_2+d_3+d_5)+(d_5)",
    "(d_1+d_3+d_4+d_5)+(d_1+d_2+d_4+d_5)+(d_1+d_2+d_3+d_4)+(d_4)",
    "(d_1+d_3+d_4+d_5)+(d_1+d_2+d_3+d_5)+(d_1+d_2+d_3+d_4)+(d_3)",
    "(d_1+d_2+d_4+d_5)+(d_1+d_2+d_3+d_5)+(d_1+d_2+d_3+d_4)+(d_2)",
};

using HelperSet = std::set<NodeId>;

// A one-term sum is d_j (node S_j); a (k-1)-term sum omitting d_i is p_i.
// Returns an empty set for anything else.
inline HelperSet helpers_from_sums(int k, const std::string& line) {
  HelperSet out;
  std::size_t pos = 0;
  while ((pos = line.find('(', pos)) != std::string::npos) {
    const auto end = line.find(')', pos);
    std::set<int> support;
    std::istringstream terms(line.substr(pos + 1, end - pos - 1));
    std::string t;
    while (std::getline(terms, t, '+')) support.insert(std::stoi(t.substr(t.find('_') + 1)));
    if (support.size() == 1) {
      out.insert(NodeId::systematic(*support.begin() - 1));
    } else if (static_cast<int>(support.size()) == k - 1) {
      for (int i = 1; i <= k; ++i)
        if (!support.count(i)) out.insert(NodeId::parity(i - 1));
    } else {
      return {};
    }
    pos = end;
  }
  return out;
}

inline std::set<HelperSet> helper_sets(int k, const std::vector<std::string>& lines) {
  std::set<HelperSet> out;
  for (const auto& l : lines) out.insert(helpers_from_sums(k, l));
  return out;
}

}  // namespace nmds::worked
