#include "ranq/scalar.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace ranq {

Rat rat(long num, long den) {
    if (den == 0) throw std::invalid_argument("rat: zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

std::string rat_str(const Rat& r) { return r.get_str(); }

Poly::Poly(Rat constant) {
    if (constant != 0) c_.push_back(constant);
}

Poly::Poly(std::vector<Rat> coeffs) : c_(std::move(coeffs)) { trim(); }

Poly Poly::variable() {
    Poly p;
    p.c_ = {Rat(0), Rat(1)};
    return p;
}

const Rat& Poly::coeff(int k) const {
    static const Rat zero(0);
    if (k < 0 || k >= static_cast<int>(c_.size())) return zero;
    return c_[k];
}

Rat Poly::leading() const {
    if (c_.empty()) return Rat(0);
    return c_.back();
}

void Poly::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Poly Poly::operator-() const {
    Poly r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
}

Poly Poly::operator+(const Poly& o) const {
    Poly r;
    r.c_.resize(std::max(c_.size(), o.c_.size()), Rat(0));
    for (size_t i = 0; i < c_.size(); ++i) r.c_[i] += c_[i];
    for (size_t i = 0; i < o.c_.size(); ++i) r.c_[i] += o.c_[i];
    r.trim();
    return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator*(const Poly& o) const {
    if (c_.empty() || o.c_.empty()) return Poly();
    Poly r;
    r.c_.assign(c_.size() + o.c_.size() - 1, Rat(0));
    for (size_t i = 0; i < c_.size(); ++i)
        for (size_t j = 0; j < o.c_.size(); ++j) r.c_[i + j] += c_[i] * o.c_[j];
    r.trim();
    return r;
}

void Poly::divmod(const Poly& a, const Poly& b, Poly& q, Poly& r) {
    if (b.is_zero()) throw std::invalid_argument("Poly::divmod: division by zero");
    q = Poly();
    r = a;
    while (!r.is_zero() && r.degree() >= b.degree()) {
        int d = r.degree() - b.degree();
        Rat c = r.leading() / b.leading();
        std::vector<Rat> mono(d + 1, Rat(0));
        mono[d] = c;
        Poly m(std::move(mono));
        q = q + m;
        r = r - m * b;
    }
}

Poly Poly::gcd(const Poly& a, const Poly& b) {
    Poly x = a, y = b;
    while (!y.is_zero()) {
        Poly q, r;
        divmod(x, y, q, r);
        x = y;
        y = r.monic();
    }
    return x.monic();
}

Poly Poly::monic() const {
    if (is_zero()) return *this;
    Poly r = *this;
    Rat lead = r.leading();
    for (auto& x : r.c_) x /= lead;
    return r;
}

std::string Poly::str() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int k = degree(); k >= 0; --k) {
        const Rat& ck = coeff(k);
        if (ck == 0) continue;
        Rat a = ck > 0 ? ck : Rat(-ck);
        if (first) {
            if (ck < 0) os << "-";
            first = false;
        } else {
            os << (ck < 0 ? "-" : "+");
        }
        if (k == 0) {
            os << a.get_str();
        } else {
            if (a != 1) os << a.get_str() << "*";
            os << "t";
            if (k > 1) os << "^" << k;
        }
    }
    return os.str();
}

Scalar::Scalar(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw std::invalid_argument("Scalar: zero denominator");
    normalize();
}

Scalar Scalar::tau() { return Scalar(Poly::variable(), Poly(Rat(1))); }

Scalar Scalar::of(long num, long den) { return Scalar(rat(num, den)); }

bool Scalar::is_one() const {
    return num_.degree() == 0 && den_.degree() == 0 && num_.coeff(0) == den_.coeff(0);
}

Rat Scalar::rational_value() const {
    if (!is_rational_constant()) throw std::logic_error("Scalar: not a rational constant");
    if (num_.is_zero()) return Rat(0);
    return num_.coeff(0) / den_.coeff(0);
}

void Scalar::normalize() {
    if (num_.is_zero()) {
        den_ = Poly(Rat(1));
        return;
    }
    Poly g = Poly::gcd(num_, den_);
    if (g.degree() > 0) {
        Poly q, r;
        Poly::divmod(num_, g, q, r);
        num_ = q;
        Poly::divmod(den_, g, q, r);
        den_ = q;
    }
    Rat lead = den_.leading();
    if (lead != 1) {
        std::vector<Rat> nc = num_.coeffs(), dc = den_.coeffs();
        for (auto& x : nc) x /= lead;
        for (auto& x : dc) x /= lead;
        num_ = Poly(std::move(nc));
        den_ = Poly(std::move(dc));
    }
}

Scalar Scalar::operator-() const {
    Scalar r = *this;
    r.num_ = -r.num_;
    return r;
}

Scalar Scalar::operator+(const Scalar& o) const {
    return Scalar(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

Scalar Scalar::operator-(const Scalar& o) const { return *this + (-o); }

Scalar Scalar::operator*(const Scalar& o) const {
    return Scalar(num_ * o.num_, den_ * o.den_);
}

Scalar Scalar::operator/(const Scalar& o) const {
    if (o.is_zero()) throw std::invalid_argument("Scalar: division by zero");
    return Scalar(num_ * o.den_, den_ * o.num_);
}

Scalar Scalar::inverse() const {
    if (is_zero()) throw std::invalid_argument("Scalar: inverse of zero");
    return Scalar(den_, num_);
}

Scalar Scalar::at_tau_zero() const {
    if (den_.coeff(0) == 0) throw std::invalid_argument("Scalar: pole at t=0");
    return Scalar(Rat(num_.coeff(0) / den_.coeff(0)));
}

Scalar operator*(long a, const Scalar& s) { return Scalar(a) * s; }

namespace {

// Pull out the integer content: returns (integer-coefficient poly as string,
// positive common denominator).
std::pair<std::string, mpz_class> integerized(const Poly& p, mpz_class& lcm_out) {
    mpz_class lcm(1);
    for (const Rat& c : p.coeffs()) {
        mpz_class d = c.get_den();
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), lcm.get_mpz_t(), d.get_mpz_t());
        lcm = lcm / g * d;
    }
    std::vector<Rat> scaled = p.coeffs();
    for (auto& c : scaled) c *= Rat(lcm);
    Poly q{std::vector<Rat>(scaled)};
    lcm_out = lcm;
    return {q.str(), lcm};
}

}  // namespace

std::string Scalar::str() const {
    if (is_zero()) return "0";
    // Scale numerator and denominator to integer coefficients with overall
    // content reduced; denominator kept with positive leading coefficient.
    mpz_class ln, ld;
    auto [ns, lnv] = integerized(num_, ln);
    auto [ds, ldv] = integerized(den_, ld);
    // num/den == (num*ln)/(den*ln) ... recompute carefully via cross scaling:
    // value = (num_int/ln) / (den_int/ld) = num_int*ld / (den_int*ln).
    std::vector<Rat> nc = num_.coeffs(), dc = den_.coeffs();
    for (auto& c : nc) c *= Rat(ln * ld);
    for (auto& c : dc) c *= Rat(ln * ld);
    // Both now integral; divide out common integer content.
    mpz_class content(0);
    auto gather = [&content](const std::vector<Rat>& v) {
        for (const Rat& c : v) {
            mpz_class num = c.get_num();
            mpz_class g;
            mpz_gcd(g.get_mpz_t(), content.get_mpz_t(), num.get_mpz_t());
            content = g;
        }
    };
    gather(nc);
    gather(dc);
    if (content == 0) content = 1;
    for (auto& c : nc) c /= Rat(content);
    for (auto& c : dc) c /= Rat(content);
    Poly n{std::move(nc)}, d{std::move(dc)};
    if (d.leading() < 0) {
        n = -n;
        d = -d;
    }
    if (d.degree() == 0 && d.coeff(0) == 1) return n.str();
    std::string ns2 = n.str(), ds2 = d.str();
    std::string left = (n.degree() > 0) ? "(" + ns2 + ")" : ns2;
    std::string right = (d.degree() > 0) ? "(" + ds2 + ")" : ds2;
    return left + "/" + right;
}

namespace {

struct Parser {
    const std::string& s;
    size_t i = 0;
    explicit Parser(const std::string& str) : s(str) {}

    void skip_ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool eat(char c) {
        skip_ws();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("Scalar::parse: " + what + " at position " +
                                    std::to_string(i) + " in \"" + s + "\"");
    }

    mpz_class integer() {
        skip_ws();
        size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == start) fail("expected integer");
        return mpz_class(s.substr(start, i - start));
    }

    // term := int | int '*' t-power | t-power ;  t-power := 't' ['^' int]
    Poly term(int sign) {
        skip_ws();
        mpz_class coeff(1);
        bool have_coeff = false;
        if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            coeff = integer();
            have_coeff = true;
        }
        int power = 0;
        skip_ws();
        if (i < s.size() && (s[i] == 't' || s[i] == '*')) {
            if (s[i] == '*') {
                ++i;
                skip_ws();
                if (i >= s.size() || s[i] != 't') fail("expected t after *");
            }
            if (s[i] == 't') {
                ++i;
                power = 1;
                if (eat('^')) power = static_cast<int>(integer().get_si());
            }
        } else if (!have_coeff) {
            fail("expected term");
        }
        std::vector<Rat> c(power + 1, Rat(0));
        c[power] = Rat(sign) * Rat(coeff);
        return Poly(std::move(c));
    }

    Poly poly() {
        Poly p;
        int sign = 1;
        skip_ws();
        if (eat('-')) sign = -1;
        else eat('+');
        p = p + term(sign);
        while (true) {
            skip_ws();
            if (eat('+')) sign = 1;
            else if (eat('-')) sign = -1;
            else break;
            p = p + term(sign);
        }
        return p;
    }

    Poly factor() {
        if (eat('(')) {
            Poly p = poly();
            if (!eat(')')) fail("expected )");
            return p;
        }
        return poly();
    }
};

}  // namespace

Scalar Scalar::parse(const std::string& s) {
    Parser p(s);
    p.skip_ws();
    int lead_sign = 1;
    if (p.eat('-')) lead_sign = -1;
    Poly num = p.factor();
    if (lead_sign < 0) num = -num;
    Poly den{Rat(1)};
    p.skip_ws();
    if (p.eat('/')) den = p.factor();
    p.skip_ws();
    if (p.i != s.size()) p.fail("trailing characters");
    return Scalar(num, den);
}

}  // namespace ranq
