#include "ccert/control_set.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ccert/lp.hpp"

namespace ccert {

ControlSet ControlSet::interval(double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("interval: lo must be <= hi");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Interval;
    n->lo = lo;
    n->hi = hi;
    return ControlSet(std::move(n));
}

ControlSet ControlSet::box(const std::vector<std::pair<double, double>>& bounds) {
    if (bounds.empty()) throw std::invalid_argument("box: needs at least one axis");
    for (auto& [lo, hi] : bounds)
        if (!(lo <= hi)) throw std::invalid_argument("box: lo must be <= hi on every axis");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Box;
    n->bounds = bounds;
    return ControlSet(std::move(n));
}

ControlSet ControlSet::polytope(const std::vector<Eigen::VectorXd>& vertices) {
    if (vertices.empty()) throw std::invalid_argument("polytope: needs at least one vertex");
    for (const auto& v : vertices)
        if (v.size() != vertices.front().size())
            throw std::invalid_argument("polytope: vertices must share a dimension");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Polytope;
    n->vertices = vertices;
    return ControlSet(std::move(n));
}

ControlSet ControlSet::disk_sector(double half_angle, int generator_count) {
    if (!(half_angle > 0) || !(half_angle < 1.5707963267948966))
        throw std::invalid_argument("disk_sector: half angle must lie in (0, pi/2)");
    if (generator_count < 2) throw std::invalid_argument("disk_sector: need >= 2 arc points");
    auto n = std::make_shared<Node>();
    n->kind = Kind::DiskSector;
    n->half_angle = half_angle;
    n->count = generator_count;
    return ControlSet(std::move(n));
}

ControlSet ControlSet::scaled(double epsilon, const ControlSet& inner) {
    if (!(epsilon > 0)) throw std::invalid_argument("scale: epsilon must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Scaled;
    n->epsilon = epsilon;
    n->inner = inner.node_;
    return ControlSet(std::move(n));
}

ControlSet ControlSet::product(const std::vector<ControlSet>& factors) {
    if (factors.empty()) throw std::invalid_argument("product: needs at least one factor");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Product;
    for (const auto& f : factors) n->factors.push_back(f.node_);
    return ControlSet(std::move(n));
}

int ControlSet::dim_of(const Node& n) {
    switch (n.kind) {
        case Kind::Interval: return 1;
        case Kind::Box: return static_cast<int>(n.bounds.size());
        case Kind::Polytope: return static_cast<int>(n.vertices.front().size());
        case Kind::DiskSector: return 2;
        case Kind::Scaled: return dim_of(*n.inner);
        case Kind::Product: {
            int d = 0;
            for (const auto& f : n.factors) d += dim_of(*f);
            return d;
        }
    }
    return 0;
}

int ControlSet::dim() const { return dim_of(*node_); }

void ControlSet::generators_of(const Node& n, std::vector<Eigen::VectorXd>& out) {
    switch (n.kind) {
        case Kind::Interval: {
            out.push_back(Eigen::VectorXd::Constant(1, n.lo));
            out.push_back(Eigen::VectorXd::Constant(1, n.hi));
            return;
        }
        case Kind::Box: {
            int m = static_cast<int>(n.bounds.size());
            int corners = 1 << m;
            for (int mask = 0; mask < corners; ++mask) {
                Eigen::VectorXd v(m);
                for (int j = 0; j < m; ++j)
                    v[j] = (mask >> j) & 1 ? n.bounds[j].second : n.bounds[j].first;
                out.push_back(std::move(v));
            }
            return;
        }
        case Kind::Polytope:
            out.insert(out.end(), n.vertices.begin(), n.vertices.end());
            return;
        case Kind::DiskSector: {
            // arc points including both endpoints, plus the origin
            for (int j = 0; j < n.count; ++j) {
                double psi = -n.half_angle + 2 * n.half_angle * j / (n.count - 1);
                Eigen::VectorXd v(2);
                v << std::cos(psi), std::sin(psi);
                out.push_back(std::move(v));
            }
            out.push_back(Eigen::VectorXd::Zero(2));
            return;
        }
        case Kind::Scaled: {
            std::vector<Eigen::VectorXd> inner;
            generators_of(*n.inner, inner);
            for (auto& v : inner) out.push_back(n.epsilon * v);
            return;
        }
        case Kind::Product: {
            std::vector<std::vector<Eigen::VectorXd>> parts;
            for (const auto& f : n.factors) {
                parts.emplace_back();
                generators_of(*f, parts.back());
            }
            std::vector<Eigen::VectorXd> acc{Eigen::VectorXd(0)};
            for (const auto& part : parts) {
                std::vector<Eigen::VectorXd> next;
                next.reserve(acc.size() * part.size());
                for (const auto& a : acc)
                    for (const auto& g : part) {
                        Eigen::VectorXd v(a.size() + g.size());
                        v << a, g;
                        next.push_back(std::move(v));
                    }
                acc = std::move(next);
            }
            out.insert(out.end(), acc.begin(), acc.end());
            return;
        }
    }
}

std::vector<Eigen::VectorXd> ControlSet::generators() const {
    std::vector<Eigen::VectorXd> out;
    generators_of(*node_, out);
    return out;
}

double ControlSet::support_of(const Node& n, const Eigen::VectorXd& p) {
    switch (n.kind) {
        case Kind::Interval: return std::max(n.lo * p[0], n.hi * p[0]);
        case Kind::Box: {
            double h = 0;
            for (std::size_t j = 0; j < n.bounds.size(); ++j)
                h += std::max(n.bounds[j].first * p[static_cast<Eigen::Index>(j)],
                              n.bounds[j].second * p[static_cast<Eigen::Index>(j)]);
            return h;
        }
        case Kind::Polytope: {
            double h = -std::numeric_limits<double>::infinity();
            for (const auto& v : n.vertices) h = std::max(h, p.dot(v));
            return h;
        }
        case Kind::DiskSector: {
            // max over {0} and the arc {(cos psi, sin psi), |psi| <= alpha}
            double best = 0.0;
            double r = p.norm();
            if (r > 0) {
                double psi = std::atan2(p[1], p[0]);
                if (std::fabs(psi) <= n.half_angle) {
                    best = std::max(best, r);
                } else {
                    double a = n.half_angle;
                    best = std::max(best, p[0] * std::cos(a) + p[1] * std::sin(a));
                    best = std::max(best, p[0] * std::cos(a) - p[1] * std::sin(a));
                }
            }
            return best;
        }
        case Kind::Scaled: return n.epsilon * support_of(*n.inner, p);
        case Kind::Product: {
            double h = 0;
            int off = 0;
            for (const auto& f : n.factors) {
                int dm = dim_of(*f);
                h += support_of(*f, p.segment(off, dm));
                off += dm;
            }
            return h;
        }
    }
    return 0;
}

double ControlSet::support(const Eigen::VectorXd& p) const {
    if (p.size() != dim()) throw std::invalid_argument("support: covector dimension mismatch");
    return support_of(*node_, p);
}

bool ControlSet::zero_of(const Node& n) {
    switch (n.kind) {
        case Kind::Interval: return n.lo <= 0 && 0 <= n.hi;
        case Kind::Box:
            for (auto& [lo, hi] : n.bounds)
                if (lo > 0 || hi < 0) return false;
            return true;
        case Kind::Polytope: {
            // feasibility LP: sum lambda_i v_i = 0, sum lambda_i = 1, lambda >= 0
            const int m = static_cast<int>(n.vertices.front().size());
            const int nv = static_cast<int>(n.vertices.size());
            LpProblem lp;
            lp.c = Eigen::VectorXd::Zero(nv);
            lp.a_eq = Eigen::MatrixXd::Zero(m + 1, nv);
            lp.b_eq = Eigen::VectorXd::Zero(m + 1);
            for (int i = 0; i < nv; ++i) {
                lp.a_eq.col(i).head(m) = n.vertices[static_cast<std::size_t>(i)];
                lp.a_eq(m, i) = 1.0;
            }
            lp.b_eq[m] = 1.0;
            lp.lo = Eigen::VectorXd::Zero(nv);
            lp.hi = Eigen::VectorXd::Constant(nv, std::numeric_limits<double>::infinity());
            return lp_solve(lp).status == LpStatus::Optimal;
        }
        case Kind::DiskSector: return true;  // origin is a vertex of the sector
        case Kind::Scaled: return zero_of(*n.inner);
        case Kind::Product:
            for (const auto& f : n.factors)
                if (!zero_of(*f)) return false;
            return true;
    }
    return false;
}

bool ControlSet::contains_zero() const { return zero_of(*node_); }

double ControlSet::radius_of(const Node& n) {
    switch (n.kind) {
        case Kind::Interval: return std::max(std::fabs(n.lo), std::fabs(n.hi));
        case Kind::Box: {
            double s = 0;
            for (auto& [lo, hi] : n.bounds) {
                double m = std::max(std::fabs(lo), std::fabs(hi));
                s += m * m;
            }
            return std::sqrt(s);
        }
        case Kind::Polytope: {
            double r = 0;
            for (const auto& v : n.vertices) r = std::max(r, v.norm());
            return r;
        }
        case Kind::DiskSector: return 1.0;
        case Kind::Scaled: return n.epsilon * radius_of(*n.inner);
        case Kind::Product: {
            double s = 0;
            for (const auto& f : n.factors) {
                double r = radius_of(*f);
                s += r * r;
            }
            return std::sqrt(s);
        }
    }
    return 0;
}

double ControlSet::radius_bound() const { return radius_of(*node_); }

double ControlSet::disk_half_angle() const {
    if (node_->kind == Kind::DiskSector) return node_->half_angle;
    if (node_->kind == Kind::Scaled) return ControlSet(node_->inner).disk_half_angle();
    throw std::logic_error("not a disk sector");
}

int ControlSet::generator_count() const {
    if (node_->kind == Kind::DiskSector) return node_->count;
    if (node_->kind == Kind::Scaled) return ControlSet(node_->inner).generator_count();
    return static_cast<int>(generators().size());
}

std::string ControlSet::describe_of(const Node& n) {
    std::ostringstream os;
    switch (n.kind) {
        case Kind::Interval: os << "[" << n.lo << ", " << n.hi << "]"; break;
        case Kind::Box:
            os << "box";
            for (auto& [lo, hi] : n.bounds) os << " [" << lo << "," << hi << "]";
            break;
        case Kind::Polytope: os << "polytope(" << n.vertices.size() << " vertices)"; break;
        case Kind::DiskSector: os << "disk_sector(alpha=" << n.half_angle << ")"; break;
        case Kind::Scaled: os << n.epsilon << " * " << describe_of(*n.inner); break;
        case Kind::Product: {
            os << "product(";
            bool first = true;
            for (const auto& f : n.factors) {
                if (!first) os << " x ";
                os << describe_of(*f);
                first = false;
            }
            os << ")";
            break;
        }
    }
    return os.str();
}

std::string ControlSet::describe() const { return describe_of(*node_); }

}  // namespace ccert
