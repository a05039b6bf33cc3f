#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace ccert {

// Compact convex control set U in R^m, kept in two forms at once: a finite
// generator list (inner approximation, every generator is a true member) and
// an exact support function (outer information). Cone sufficiency tests use
// the generators; obstruction margins and the LTV reachability oracle use the
// support function.
class ControlSet {
public:
    enum class Kind { Interval, Box, Polytope, DiskSector, Scaled, Product };

    static ControlSet interval(double lo, double hi);
    static ControlSet box(const std::vector<std::pair<double, double>>& bounds);
    static ControlSet polytope(const std::vector<Eigen::VectorXd>& vertices);
    // Unit-radius sector of the (u1,u2) disk: |u2| <= u1 tan(half_angle).
    static ControlSet disk_sector(double half_angle, int generator_count = 64);
    static ControlSet scaled(double epsilon, const ControlSet& inner);
    static ControlSet product(const std::vector<ControlSet>& factors);

    Kind kind() const { return node_->kind; }
    int dim() const;

    std::vector<Eigen::VectorXd> generators() const;
    double support(const Eigen::VectorXd& p) const;

    // Exact membership of the origin per variant definition.
    bool contains_zero() const;
    // Norm bound on the set (compactness surrogate): all generators must stay
    // within it.
    double radius_bound() const;

    ControlSet scale(double epsilon) const { return scaled(epsilon, *this); }

    std::string describe() const;

    double disk_half_angle() const;
    int generator_count() const;

private:
    struct Node {
        Kind kind;
        double lo = 0, hi = 0;                         // Interval
        std::vector<std::pair<double, double>> bounds; // Box
        std::vector<Eigen::VectorXd> vertices;         // Polytope
        double half_angle = 0;                         // DiskSector
        int count = 64;                                // DiskSector sampling
        double epsilon = 1;                            // Scaled
        std::vector<std::shared_ptr<const Node>> factors;
        std::shared_ptr<const Node> inner;
    };
    std::shared_ptr<const Node> node_;
    explicit ControlSet(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static int dim_of(const Node& n);
    static void generators_of(const Node& n, std::vector<Eigen::VectorXd>& out);
    static double support_of(const Node& n, const Eigen::VectorXd& p);
    static bool zero_of(const Node& n);
    static double radius_of(const Node& n);
    static std::string describe_of(const Node& n);
};

}  // namespace ccert
