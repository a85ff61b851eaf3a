class Repo {
    private final List<String> items = new ArrayList<>();

    int size() {
        return items.size();
    }

    void clear() {
        items.clear();
    }
}
