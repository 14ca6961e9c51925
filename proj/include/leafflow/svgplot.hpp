#ifndef LEAFFLOW_SVGPLOT_HPP
#define LEAFFLOW_SVGPLOT_HPP

#include <string>
#include <vector>

namespace leafflow {

/// Minimal self-contained SVG line plots for run diagnostics.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label, bool log_y = false);

    void add_series(const std::string& name, const std::vector<double>& x,
                    const std::vector<double>& y);
    void add_horizontal(const std::string& name, double y);

    std::string render(int width = 760, int height = 480) const;
    void save(const std::string& path, int width = 760, int height = 480) const;

private:
    struct Series {
        std::string name;
        std::vector<double> x, y;
        bool horizontal = false;
        double level = 0.0;
    };
    std::string title_, x_label_, y_label_;
    bool log_y_;
    std::vector<Series> series_;
};

}  // namespace leafflow

#endif
