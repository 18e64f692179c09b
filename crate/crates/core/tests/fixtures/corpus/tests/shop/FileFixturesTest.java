package shop;

import static org.junit.Assert.assertFalse;
import static org.junit.Assert.assertTrue;

import java.io.File;
import java.io.FileReader;
import java.io.FileWriter;
import java.io.IOException;
import java.nio.file.Files;
import java.nio.file.Path;
import java.nio.file.Paths;
import java.sql.Connection;
import java.sql.DriverManager;

import org.junit.Test;

public class FileFixturesTest {

    private File workDir = new File("work");

    @Test
    public void unguardedFileRead() {
        File f = new File("data/input.txt");
        long size = f.length();
        assertTrue(size > 0);
    }

    @Test
    public void guardedByExists() {
        File f = new File("data/input.txt");
        if (f.exists()) {
            assertTrue(f.length() > 0);
        }
    }

    @Test
    public void guardedByIsFile() {
        File f = new File("data/config.properties");
        assertTrue(f.isFile());
        f.delete();
    }

    @Test
    public void guardedByNotExists() throws IOException {
        Path p = Paths.get("data", "out.txt");
        if (Files.notExists(p)) {
            Files.createFile(p);
        }
    }

    @Test
    public void unguardedWriter() throws IOException {
        FileWriter w = new FileWriter("out.log");
        w.write("x");
        w.close();
    }

    @Test
    public void readerAndWriter() throws Exception {
        FileReader r = new FileReader("in.txt");
        FileWriter w = new FileWriter("out.txt");
        Connection c = DriverManager.getConnection("jdbc:h2:mem:test");
        w.write(r.read());
        c.close();
    }

    @Test
    public void guardAfterUse() {
        File f = new File("late.txt");
        f.delete();
        assertFalse(f.exists());
    }

    @Test
    public void fieldUnguarded() {
        workDir.mkdirs();
    }
}
