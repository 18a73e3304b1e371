#include "algcsp/relcore.hpp"

#include <algorithm>
#include <set>

namespace algcsp {

bool DomainTable::has(DomainId id) const {
    for (const auto& d : domains)
        if (d.id == id) return true;
    return false;
}

const DomainTable::Domain& DomainTable::entry(DomainId id) const {
    for (const auto& d : domains)
        if (d.id == id) return d;
    throw contract_error("unknown domain id " + std::to_string(id));
}

const std::vector<Element>& DomainTable::elements(DomainId id) const {
    return entry(id).elements;
}

std::size_t DomainTable::size(DomainId id) const {
    return entry(id).elements.size();
}

int DomainTable::index_of(DomainId id, Element e) const {
    const auto& elems = elements(id);
    auto it = std::lower_bound(elems.begin(), elems.end(), e);
    if (it == elems.end() || *it != e)
        throw contract_error("element " + std::to_string(e) +
                             " not in domain " + std::to_string(id));
    return static_cast<int>(it - elems.begin());
}

static void validate_elements(const std::vector<Element>& elems) {
    for (std::size_t i = 0; i < elems.size(); ++i) {
        if (elems[i] < 0)
            throw contract_error("negative domain element");
        if (i > 0 && elems[i] <= elems[i - 1])
            throw contract_error("domain elements must be strictly ascending");
    }
}

DomainId DomainTable::add(std::vector<Element> elems, std::string tag) {
    DomainId id = 0;
    for (const auto& d : domains) id = std::max(id, d.id + 1);
    add_with_id(id, std::move(elems), std::move(tag));
    return id;
}

void DomainTable::add_with_id(DomainId id, std::vector<Element> elems, std::string tag) {
    if (has(id))
        throw contract_error("duplicate domain id " + std::to_string(id));
    validate_elements(elems);
    domains.push_back(Domain{id, std::move(elems), std::move(tag)});
}

Relation::Relation(std::vector<DomainId> sig, std::vector<Tuple> tups)
    : signature(std::move(sig)), tuples(std::move(tups)) {
    for (const auto& t : tuples)
        if (t.size() != signature.size())
            throw contract_error("tuple arity does not match signature");
    std::sort(tuples.begin(), tuples.end());
    tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
}

bool Relation::contains(const Tuple& t) const {
    return std::binary_search(tuples.begin(), tuples.end(), t);
}

Relation make_relation(const DomainTable& dt, std::vector<DomainId> sig,
                       std::vector<Tuple> tups) {
    for (DomainId id : sig)
        if (!dt.has(id))
            throw contract_error("relation signature names unknown domain " +
                                 std::to_string(id));
    Relation rel(std::move(sig), std::move(tups));
    for (const auto& t : rel.tuples)
        for (std::size_t j = 0; j < t.size(); ++j)
            dt.index_of(rel.signature[j], t[j]); // throws if out of domain
    return rel;
}

void Template::add_relation(Relation rel, std::string name) {
    relations.push_back(std::move(rel));
    names.push_back(std::move(name));
}

const std::string& Template::name_of(int index) const {
    static const std::string empty;
    if (index < 0 || index >= static_cast<int>(names.size())) return empty;
    return names[index];
}

int Template::index_of_name(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

void Template::ensure_domain_unaries() {
    for (const auto& d : domains.domains) {
        std::vector<Tuple> tups;
        for (Element e : d.elements) tups.push_back({e});
        Relation unary({d.id}, std::move(tups));
        bool present = false;
        for (const auto& r : relations)
            if (r == unary) { present = true; break; }
        if (!present)
            add_relation(std::move(unary), "dom" + std::to_string(d.id));
    }
    includes_domain_unaries = true;
}

void InstanceStructure::normalize() {
    std::set<Var> vs(variables.begin(), variables.end());
    for (const auto& rel_scopes : scopes)
        for (const auto& sc : rel_scopes)
            vs.insert(sc.begin(), sc.end());
    variables.assign(vs.begin(), vs.end());
}

std::size_t InstanceStructure::constraint_count() const {
    std::size_t n = 0;
    for (const auto& rel_scopes : scopes) n += rel_scopes.size();
    return n;
}

Relation project(const Relation& rel, const std::vector<int>& coords) {
    if (coords.empty())
        throw contract_error("projection onto the empty coordinate set");
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (coords[i] < 0 || coords[i] >= rel.arity())
            throw std::out_of_range("projection index out of range");
        if (i > 0 && coords[i] <= coords[i - 1])
            throw contract_error("projection coordinates must be ascending");
    }
    std::vector<DomainId> sig;
    for (int c : coords) sig.push_back(rel.signature[c]);
    std::vector<Tuple> tups;
    for (const auto& t : rel.tuples) {
        Tuple p;
        for (int c : coords) p.push_back(t[c]);
        tups.push_back(std::move(p));
    }
    return Relation(std::move(sig), std::move(tups));
}

long long tuple_index(const std::vector<Element>& dom, const Tuple& t) {
    long long idx = 0;
    for (Element e : t) {
        auto it = std::lower_bound(dom.begin(), dom.end(), e);
        if (it == dom.end() || *it != e)
            throw contract_error("tuple entry outside its domain");
        idx = idx * static_cast<long long>(dom.size()) + (it - dom.begin());
    }
    return idx;
}

long long lex_rank(const std::vector<Element>& dom, const Tuple& t) {
    return tuple_index(dom, t) + 1;
}

long long power_count(std::size_t domain_size, int n) {
    long long p = 1;
    for (int i = 0; i < n; ++i) {
        if (p > (1LL << 62) / std::max<long long>(1, domain_size))
            throw scale_guard_error("power domain too large");
        p *= static_cast<long long>(domain_size);
    }
    return p;
}

Tuple alpha(const std::vector<Element>& dom, int n, long long j) {
    const long long total = power_count(dom.size(), n);
    if (j < 1 || j > total)
        throw contract_error("alpha rank out of range");
    long long idx = j - 1;
    Tuple t(n, 0);
    for (int pos = n - 1; pos >= 0; --pos) {
        t[pos] = dom[idx % dom.size()];
        idx /= static_cast<long long>(dom.size());
    }
    return t;
}

bool next_radix_tuple(std::vector<int>& idx, const std::vector<int>& radix) {
    for (int pos = static_cast<int>(idx.size()) - 1; pos >= 0; --pos) {
        if (++idx[pos] < radix[pos]) return true;
        idx[pos] = 0;
    }
    return false;
}

Relation power_relation(const DomainTable& dt, const Relation& rel, int n) {
    if (n < 1) throw contract_error("power_relation requires n >= 1");
    const int m = rel.arity();
    std::vector<Tuple> out;
    if (!rel.tuples.empty()) {
        const long long count = power_count(rel.tuples.size(), n);
        if (count > (1LL << 22))
            throw scale_guard_error("relation power too large to materialize");
        std::vector<int> rows(n, 0);
        std::vector<int> radix(n, static_cast<int>(rel.tuples.size()));
        do {
            Tuple enc(m, 0);
            for (int l = 0; l < m; ++l) {
                Tuple column(n, 0);
                for (int r = 0; r < n; ++r) column[r] = rel.tuples[rows[r]][l];
                enc[l] = static_cast<Element>(
                    tuple_index(dt.elements(rel.signature[l]), column));
            }
            out.push_back(std::move(enc));
        } while (next_radix_tuple(rows, radix));
    }
    return Relation(rel.signature, std::move(out));
}

Template power_template(const Template& tmpl, int n) {
    Template out;
    for (const auto& d : tmpl.domains.domains) {
        const long long count = power_count(d.elements.size(), n);
        if (count > (1 << 16))
            throw scale_guard_error("power domain too large to materialize");
        std::vector<Element> elems(count);
        for (long long i = 0; i < count; ++i) elems[i] = static_cast<Element>(i);
        out.domains.add_with_id(d.id, std::move(elems),
                                "power" + std::to_string(n) + ":" + std::to_string(d.id));
    }
    for (std::size_t l = 0; l < tmpl.relations.size(); ++l)
        out.add_relation(power_relation(tmpl.domains, tmpl.relations[l], n),
                         tmpl.name_of(static_cast<int>(l)));
    return out;
}

HomCheck check_homomorphism(const Assignment& h, const InstanceStructure& inst,
                            const Template& dst) {
    if (inst.scopes.size() != dst.relations.size())
        throw contract_error("instance and template relation counts differ");
    for (Var v : inst.variables)
        if (!h.count(v))
            throw contract_error("assignment not total: missing variable " +
                                 std::to_string(v));
    for (std::size_t l = 0; l < inst.scopes.size(); ++l) {
        const Relation& rel = dst.relations[l];
        for (std::size_t s = 0; s < inst.scopes[l].size(); ++s) {
            const auto& scope = inst.scopes[l][s];
            if (static_cast<int>(scope.size()) != rel.arity())
                throw contract_error("scope arity does not match relation " +
                                     std::to_string(l));
            Tuple image;
            for (Var v : scope) {
                auto it = h.find(v);
                if (it == h.end())
                    throw contract_error("assignment not total: missing variable " +
                                         std::to_string(v));
                image.push_back(it->second);
            }
            if (!rel.contains(image)) {
                HomCheck bad;
                bad.ok = false;
                bad.rel_index = static_cast<int>(l);
                bad.item_index = static_cast<int>(s);
                bad.scope = scope;
                bad.image = image;
                bad.message = "image tuple not in relation " + std::to_string(l);
                return bad;
            }
        }
    }
    return {};
}

HomCheck check_template_homomorphism(const TemplateMap& h, const Template& src,
                                     const Template& dst) {
    if (src.relations.size() != dst.relations.size())
        throw contract_error("templates have different relation counts");
    for (std::size_t l = 0; l < src.relations.size(); ++l) {
        const Relation& a = src.relations[l];
        const Relation& b = dst.relations[l];
        if (a.arity() != b.arity())
            throw contract_error("relation arity mismatch at index " + std::to_string(l));
        for (std::size_t ti = 0; ti < a.tuples.size(); ++ti) {
            const Tuple& t = a.tuples[ti];
            Tuple image(t.size(), 0);
            bool sort_ok = true;
            for (std::size_t j = 0; j < t.size(); ++j) {
                auto it = h.find({a.signature[j], t[j]});
                if (it == h.end())
                    throw contract_error("structure map misses element (" +
                                         std::to_string(a.signature[j]) + "," +
                                         std::to_string(t[j]) + ")");
                if (it->second.first != b.signature[j]) sort_ok = false;
                image[j] = it->second.second;
            }
            if (!sort_ok || !b.contains(image)) {
                HomCheck bad;
                bad.ok = false;
                bad.rel_index = static_cast<int>(l);
                bad.item_index = static_cast<int>(ti);
                bad.witness = t;
                bad.image = image;
                bad.message = sort_ok ? "image tuple not in target relation"
                                      : "image violates target sorts";
                return bad;
            }
        }
    }
    return {};
}

HomCheck check_structure_homomorphism(const std::map<Var, Var>& h,
                                      const InstanceStructure& src,
                                      const InstanceStructure& dst) {
    if (src.scopes.size() != dst.scopes.size())
        throw contract_error("structures have different relation counts");
    for (std::size_t l = 0; l < src.scopes.size(); ++l) {
        std::set<std::vector<Var>> target(dst.scopes[l].begin(), dst.scopes[l].end());
        for (std::size_t s = 0; s < src.scopes[l].size(); ++s) {
            std::vector<Var> image;
            for (Var v : src.scopes[l][s]) {
                auto it = h.find(v);
                if (it == h.end())
                    throw contract_error("structure map misses variable " +
                                         std::to_string(v));
                image.push_back(it->second);
            }
            if (!target.count(image)) {
                HomCheck bad;
                bad.ok = false;
                bad.rel_index = static_cast<int>(l);
                bad.item_index = static_cast<int>(s);
                bad.scope = src.scopes[l][s];
                bad.image = Tuple(image.begin(), image.end());
                bad.message = "scope image not present in target structure";
                return bad;
            }
        }
    }
    return {};
}

} // namespace algcsp
