#ifndef DSC_CSVIO_HPP
#define DSC_CSVIO_HPP

#include <cstdio>
#include <string>

namespace dsc {

// Fixed-format float for CSV output; reproducible bytes for identical inputs.
inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace dsc

#endif
