class Key {
    private final String id;

    @Override
    public boolean equals(Object o) {
        if (this == o) return true;
        if (!(o instanceof Key)) return false;
        return id.equals(((Key) o).id);
    }
}
